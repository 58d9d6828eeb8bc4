import type { AnswerRecord, SparqlResults, Translation } from './types.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBooleanBadge(value: boolean): HTMLElement {
  const badge = el('span', `boolean-badge ${value ? 'yes' : 'no'}`, value ? 'true' : 'false');
  badge.setAttribute('role', 'status');
  return badge;
}

/** Result tables render the sparql-results+json document directly. */
export function renderResultsTable(results: SparqlResults): HTMLElement {
  const vars = results.head.vars ?? [];
  const table = el('table', 'results-table');
  const head = table.createTHead().insertRow();
  for (const v of vars) {
    const cell = document.createElement('th');
    cell.textContent = v;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const binding of results.results?.bindings ?? []) {
    const row = body.insertRow();
    for (const v of vars) {
      const term = binding[v];
      const cell = row.insertCell();
      cell.textContent = term ? term.value : '';
      if (term) cell.title = term.datatype ?? term.type;
    }
  }
  return table;
}

/** Collapsible panel showing the generated query verbatim, with copy. */
export function renderQueryPanel(query: string): HTMLElement {
  const panel = el('details', 'query-panel');
  panel.appendChild(el('summary', undefined, 'Generated SPARQL'));
  const pre = el('pre', 'query-text');
  pre.textContent = query; // byte-for-byte; never reformatted
  panel.appendChild(pre);
  const copy = el('button', 'copy-query', 'Copy');
  copy.addEventListener('click', () => {
    void navigator.clipboard?.writeText(query);
  });
  panel.appendChild(copy);
  return panel;
}

export function renderAttemptTrace(translation: Translation): HTMLElement {
  const list = el('ol', 'attempt-trace');
  translation.attempts.forEach((attempt, i) => {
    const item = el('li', 'attempt');
    item.appendChild(el('div', 'attempt-title', `Attempt ${i + 1}`));
    if (attempt.extracted_query) {
      const pre = el('pre', 'attempt-query');
      pre.textContent = attempt.extracted_query;
      item.appendChild(pre);
    } else {
      item.appendChild(el('div', 'attempt-raw', attempt.raw_response.slice(0, 200)));
    }
    if (attempt.parse_error) {
      item.appendChild(el('div', 'attempt-error', attempt.parse_error));
    }
    list.appendChild(item);
  });
  return list;
}

export function renderAnswerCard(record: AnswerRecord): HTMLElement {
  const card = el('article', `answer-card status-${record.status.toLowerCase()}`);
  card.dataset.status = record.status;

  if (record.status === 'Answered' && record.answer_rows?.type === 'boolean') {
    card.appendChild(renderBooleanBadge(record.answer_rows.value));
  } else if (record.status === 'Answered' && record.results) {
    card.appendChild(renderResultsTable(record.results));
  } else if (record.status === 'EmptyResult') {
    card.appendChild(el('div', 'empty-card',
      'No answers returned: the query matched nothing in the data.'));
  } else if (record.status === 'TranslationFailed') {
    const trace = el('div', 'trace-card error');
    trace.appendChild(el('div', 'trace-title',
      'No valid query could be generated. Attempts:'));
    trace.appendChild(renderAttemptTrace(record.translation));
    card.appendChild(trace);
  } else if (record.status === 'ExecutionFailed') {
    const trace = el('div', 'trace-card error');
    trace.appendChild(el('div', 'trace-title', `Query execution failed: ${record.error ?? ''}`));
    trace.appendChild(renderAttemptTrace(record.translation));
    card.appendChild(trace);
  }

  // Traceability: whenever a query exists it is shown, whatever the status.
  if (record.generated_query) {
    card.appendChild(renderQueryPanel(record.generated_query));
  }
  return card;
}

export function renderQuestionBubble(question: string): HTMLElement {
  return el('div', 'question-bubble', question);
}

export function renderBanner(message: string, onRetry?: () => void): HTMLElement {
  const banner = el('div', 'banner error', message);
  if (onRetry) {
    const retry = el('button', 'retry', 'Retry');
    retry.addEventListener('click', onRetry);
    banner.appendChild(retry);
  }
  return banner;
}
