import { ApiClient } from './api.js';
import {
  renderAnswerCard,
  renderBanner,
  renderQuestionBubble,
} from './render.js';
import type { OntologyInfo } from './types.js';

const STORAGE_KEY = 'ontochat.session';

interface StoredSession {
  sessionId: string;
  ontologyId: string;
  comments: boolean;
}

/** Wires the chat view to the API: session setup, the ask flow with a
 * single in-flight question, and history restore on reload. Switching the
 * ontology or the comments toggle always creates a fresh session. */
export class App {
  readonly select: HTMLSelectElement;
  readonly commentsToggle: HTMLInputElement;
  readonly input: HTMLInputElement;
  readonly askButton: HTMLButtonElement;
  readonly messages: HTMLElement;
  readonly bannerSlot: HTMLElement;

  sessionId: string | null = null;
  pending = false;

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient,
    readonly storage: Storage,
  ) {
    root.innerHTML = `
      <header class="controls">
        <select id="ontology-select"></select>
        <label><input type="checkbox" id="comments-toggle" checked> schema comments</label>
      </header>
      <div id="banner-slot"></div>
      <main id="messages"></main>
      <footer class="ask-bar">
        <input id="question-input" type="text" placeholder="Ask the ontology...">
        <button id="ask-button">Ask</button>
      </footer>`;
    this.select = root.querySelector('#ontology-select') as HTMLSelectElement;
    this.commentsToggle = root.querySelector('#comments-toggle') as HTMLInputElement;
    this.input = root.querySelector('#question-input') as HTMLInputElement;
    this.askButton = root.querySelector('#ask-button') as HTMLButtonElement;
    this.messages = root.querySelector('#messages') as HTMLElement;
    this.bannerSlot = root.querySelector('#banner-slot') as HTMLElement;

    this.select.addEventListener('change', () => void this.startSession());
    this.commentsToggle.addEventListener('change', () => void this.startSession());
    this.askButton.addEventListener('click', () => void this.ask());
    this.input.addEventListener('keydown', (event) => {
      if (event.key === 'Enter') void this.ask();
    });
  }

  async init(): Promise<void> {
    let ontologies: OntologyInfo[];
    try {
      ontologies = await this.api.listOntologies();
    } catch {
      this.showBanner('Cannot reach the chat service.', () => void this.init());
      return;
    }
    this.select.innerHTML = '';
    for (const ontology of ontologies) {
      const option = document.createElement('option');
      option.value = ontology.id;
      option.textContent =
        `${ontology.id} (${ontology.class_count} classes, ${ontology.individual_count} individuals)`;
      this.select.appendChild(option);
    }
    const restored = this.restoreStoredSession(ontologies);
    if (!restored) await this.startSession();
  }

  private restoreStoredSession(ontologies: OntologyInfo[]): boolean {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return false;
    let stored: StoredSession;
    try {
      stored = JSON.parse(raw) as StoredSession;
    } catch {
      return false;
    }
    if (!ontologies.some((o) => o.id === stored.ontologyId)) return false;
    this.sessionId = stored.sessionId;
    this.select.value = stored.ontologyId;
    this.commentsToggle.checked = stored.comments;
    void this.loadHistory(stored.sessionId);
    return true;
  }

  private async loadHistory(sessionId: string): Promise<void> {
    try {
      const records = await this.api.history(sessionId);
      this.messages.innerHTML = '';
      for (const record of records) {
        this.messages.appendChild(renderQuestionBubble(record.question));
        this.messages.appendChild(renderAnswerCard(record));
      }
    } catch {
      // Session unknown to the server (e.g. restart): start a new one.
      this.storage.removeItem(STORAGE_KEY);
      this.sessionId = null;
      await this.startSession();
    }
  }

  /** A new session for the current (ontology, comments) choice; the old
   * thread is never mutated, just left behind. */
  async startSession(): Promise<void> {
    const ontologyId = this.select.value;
    if (!ontologyId) return;
    const comments = this.commentsToggle.checked;
    try {
      const { session_id } = await this.api.createSession(ontologyId, comments);
      this.sessionId = session_id;
      this.messages.innerHTML = '';
      this.storage.setItem(STORAGE_KEY, JSON.stringify(
        { sessionId: session_id, ontologyId, comments } satisfies StoredSession));
      this.clearBanner();
    } catch {
      this.showBanner('Could not create a session.', () => void this.startSession());
    }
  }

  async ask(): Promise<void> {
    const question = this.input.value.trim();
    if (!question || this.pending || !this.sessionId) return;
    this.setPending(true);
    this.messages.appendChild(renderQuestionBubble(question));
    try {
      const record = await this.api.ask(this.sessionId, question);
      this.messages.appendChild(renderAnswerCard(record));
      this.input.value = '';
      this.clearBanner();
    } catch {
      this.showBanner('The service did not answer. Your question was kept.',
        () => void this.ask());
    } finally {
      this.setPending(false);
    }
  }

  private setPending(pending: boolean): void {
    this.pending = pending;
    this.askButton.disabled = pending;
    this.input.disabled = pending;
  }

  private showBanner(message: string, onRetry?: () => void): void {
    this.bannerSlot.innerHTML = '';
    this.bannerSlot.appendChild(renderBanner(message, onRetry));
  }

  private clearBanner(): void {
    this.bannerSlot.innerHTML = '';
  }
}
