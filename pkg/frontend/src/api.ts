import type { AnswerRecord, OntologyInfo, SessionResponse } from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin client over the chat-service JSON API; no UI logic lives here. */
export class ApiClient {
  constructor(private baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!response.ok) {
      const body = await response.text();
      throw new ApiError(response.status, body || response.statusText);
    }
    return response.json() as Promise<T>;
  }

  listOntologies(): Promise<OntologyInfo[]> {
    return this.request<OntologyInfo[]>('/api/ontologies');
  }

  createSession(ontologyId: string, comments: boolean): Promise<SessionResponse> {
    return this.request<SessionResponse>('/api/sessions', {
      method: 'POST',
      body: JSON.stringify({ ontology_id: ontologyId, comments }),
    });
  }

  ask(sessionId: string, question: string): Promise<AnswerRecord> {
    return this.request<AnswerRecord>(`/api/sessions/${sessionId}/ask`, {
      method: 'POST',
      body: JSON.stringify({ question }),
    });
  }

  history(sessionId: string): Promise<AnswerRecord[]> {
    return this.request<AnswerRecord[]>(`/api/sessions/${sessionId}/history`);
  }
}
