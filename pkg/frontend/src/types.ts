// Shapes of the chat-service JSON API.

export interface OntologyInfo {
  id: string;
  class_count: number;
  individual_count: number;
  has_comments: boolean;
}

export interface SessionResponse {
  session_id: string;
}

export interface Attempt {
  prompt_bytes_hash: string;
  raw_response: string;
  extracted_query: string | null;
  parse_error: string | null;
}

export interface Translation {
  attempts: Attempt[];
  final_queries: string[];
  final_query: string | null;
  succeeded: boolean;
}

export interface BindingTerm {
  type: string; // uri | literal | bnode
  value: string;
  datatype?: string;
  'xml:lang'?: string;
}

export interface SparqlResults {
  head: { vars?: string[] };
  boolean?: boolean;
  results?: { bindings: Record<string, BindingTerm>[] };
}

export type AnswerStatus = 'Answered' | 'EmptyResult' | 'TranslationFailed' | 'ExecutionFailed';

export interface AnswerRecord {
  question: string;
  status: AnswerStatus;
  generated_query: string | null;
  generated_queries: string[];
  translation: Translation;
  results: SparqlResults | null;
  error: string | null;
  answer_rows:
    | { type: 'boolean'; value: boolean }
    | { type: 'table'; columns: string[]; rows: string[][] }
    | null;
}
