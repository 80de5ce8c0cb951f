// DOM renderer. The skeleton is built once on mount; update() rewrites
// only the dynamic regions. Values land in the page through textContent
// with String() conversion and nothing else, so what the service sent
// is what the screen shows.

import { heatLevel } from './heat.js';
import type { ConsoleViewModel, Gauge } from './state.js';
import { controlsFor } from './state.js';

export interface UiActions {
  onTrigger: () => void;
  onConfirm: () => void;
}

export interface ConsoleUi {
  update(model: ConsoleViewModel): void;
  /** Detach the document-level key bindings. */
  dispose(): void;
}

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fmt(value: number | null): string {
  return value === null ? '--' : String(value);
}

// ----------------------------------------------------------------------------
// mount

export function mount(root: HTMLElement, actions: UiActions): ConsoleUi {
  const doc = root.ownerDocument;
  root.textContent = '';

  const header = el(doc, 'header', 'console-header');
  const title = el(doc, 'span', 'session-title', 'no session');
  const phaseBadge = el(doc, 'span', 'phase-badge', 'reading');
  const connBadge = el(doc, 'span', 'conn-badge', 'idle');
  header.append(title, phaseBadge, connBadge);

  const gaugePane = el(doc, 'section', 'gauges');
  const gaugeValues = new Map<string, HTMLElement>();
  const gaugeCards = new Map<string, HTMLElement>();

  const codePane = el(doc, 'section', 'code-pane');
  const codeList = el(doc, 'ol', 'code-lines');
  codePane.append(codeList);

  const promptPane = el(doc, 'section', 'prompt-pane');
  const promptText = el(doc, 'pre', 'prompt-text');
  promptPane.append(el(doc, 'h2', undefined, 'prompt'), promptText);

  const resultPane = el(doc, 'section', 'result-pane');
  const resultMeta = el(doc, 'div', 'result-meta');
  const resultCode = el(doc, 'pre', 'result-code');
  resultPane.append(el(doc, 'h2', undefined, 'refactored'), resultMeta, resultCode);

  const controls = el(doc, 'section', 'controls');
  const triggerBtn = el(doc, 'button', undefined, 'trigger prompt (g)') as HTMLButtonElement;
  triggerBtn.id = 'trigger-btn';
  const confirmBtn = el(doc, 'button', undefined, 'confirm (enter)') as HTMLButtonElement;
  confirmBtn.id = 'confirm-btn';
  const samplesNote = el(doc, 'span', 'samples-note', '0 samples');
  controls.append(triggerBtn, confirmBtn, samplesNote);

  const logPane = el(doc, 'section', 'event-log');

  root.append(header, gaugePane, codePane, controls, promptPane, resultPane, logPane);

  triggerBtn.addEventListener('click', () => {
    if (!triggerBtn.disabled) actions.onTrigger();
  });
  confirmBtn.addEventListener('click', () => {
    if (!confirmBtn.disabled) actions.onConfirm();
  });
  const onKeydown = (ev: KeyboardEvent) => {
    // same gating as the buttons: disabled phase means the key is inert
    if (ev.key === 'g' && !triggerBtn.disabled) actions.onTrigger();
    if (ev.key === 'Enter' && !confirmBtn.disabled) actions.onConfirm();
  };
  doc.addEventListener('keydown', onKeydown);

  // --------------------------------------------------------------------------
  // per-region renderers

  function renderGauges(gauges: Gauge[]): void {
    for (const gauge of gauges) {
      let card = gaugeCards.get(gauge.id);
      if (!card) {
        card = el(doc, 'div', 'gauge');
        card.dataset.gauge = gauge.id;
        const value = el(doc, 'span', 'gauge-value');
        gaugeValues.set(gauge.id, value);
        card.append(
          el(doc, 'span', 'gauge-label', gauge.label),
          value,
          el(doc, 'span', 'gauge-unit', gauge.unit)
        );
        gaugeCards.set(gauge.id, card);
        gaugePane.append(card);
      }
      const valueNode = gaugeValues.get(gauge.id)!;
      valueNode.textContent = fmt(gauge.value);
      card.classList.toggle('triggered', gauge.triggered);
      card.title = gauge.threshold === null ? '' : `threshold ${String(gauge.threshold)}`;
    }
  }

  let renderedSnippet: string | null = null;
  const lineNodes: HTMLElement[] = [];

  function renderCode(model: ConsoleViewModel): void {
    if (model.snippet !== renderedSnippet) {
      renderedSnippet = model.snippet;
      codeList.textContent = '';
      lineNodes.length = 0;
      const lines = model.snippet === '' ? [] : model.snippet.split('\n');
      for (const line of lines) {
        const node = el(doc, 'li', 'code-line heat-0', line);
        lineNodes.push(node);
        codeList.append(node);
      }
    }
    const byLine = new Map<number, number>();
    for (const entry of model.heat) byLine.set(entry.line, entry.total_fixation_ms);
    lineNodes.forEach((node, i) => {
      const level = heatLevel(byLine.get(i + 1) ?? 0);
      node.className = `code-line heat-${level}`;
    });
  }

  function renderLog(model: ConsoleViewModel): void {
    logPane.textContent = '';
    // newest first, last dozen is plenty for a console strip
    const recent = model.eventLog.slice(-12).reverse();
    for (const entry of recent) {
      const row = el(doc, 'div', 'log-row');
      row.append(
        el(doc, 'span', 'log-seq', entry.seq === null ? 'local' : String(entry.seq)),
        el(doc, 'span', 'log-type', entry.type),
        el(doc, 'span', 'log-text', entry.text)
      );
      logPane.append(row);
    }
  }

  function update(model: ConsoleViewModel): void {
    title.textContent = model.sessionId ?? 'no session';
    phaseBadge.textContent = model.phase;
    connBadge.textContent = model.connection;
    samplesNote.textContent = `${model.samplesSeen} samples`;

    const allowed = controlsFor(model.phase);
    triggerBtn.disabled = !allowed.trigger;
    confirmBtn.disabled = !allowed.confirm;

    renderGauges(model.gauges);
    renderCode(model);

    promptText.textContent = model.promptText ?? '';
    promptPane.classList.toggle('empty', model.promptText === null);

    resultCode.textContent = model.refactoredCode ?? '';
    resultMeta.textContent =
      model.backendName === null
        ? ''
        : model.backendNote
          ? `${model.backendName} (${model.backendNote})`
          : model.backendName;
    resultPane.classList.toggle('empty', model.refactoredCode === null);

    renderLog(model);
  }

  function dispose(): void {
    doc.removeEventListener('keydown', onKeydown);
  }

  return { update, dispose };
}
