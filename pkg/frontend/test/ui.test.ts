// @vitest-environment jsdom
import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import type { EventFrame, Phase } from '../src/protocol.js';
import { initialModel, reduceEvent, withSessionInfo } from '../src/state.js';
import type { ConsoleViewModel } from '../src/state.js';
import { mount } from '../src/ui.js';

function frame(seq: number, type: EventFrame['type'], phase: Phase, payload: object): EventFrame {
  return {
    protocolVersion: 1,
    sessionId: 'demo',
    seq,
    type,
    phase,
    payload: payload as Record<string, unknown>,
  };
}

const METRICS = {
  mean_fixation_duration_ms: 283.33900000000006,
  fixation_count_per_s: 3.335119512173403,
  mean_saccade_length_px: 13.218823888332894,
  mean_pupil_dilation_mm: null,
  n_fixations: 100,
  n_pupil_samples: 0,
  baseline_pupil_mm: null,
  total_time_ms: 29983.933,
};

const FLAGS = {
  long_fixation_duration: true,
  high_fixation_count: false,
  short_saccades: true,
  high_pupil_dilation: false,
};

function sessionModel(): ConsoleViewModel {
  return withSessionInfo(initialModel(), {
    sessionId: 'demo',
    phase: 'reading',
    mode: 'realtime',
    languageHint: 'java',
    snippet: 'int a;\nint b;\nint c;',
    thresholds: {
      fixation_duration_ms: 241.31,
      fixation_count_per_s: 2.89,
      saccade_length_px: 132.74,
      pupil_dilation_mm: 0.1,
      saccade_trigger_direction: 'below',
    },
    nSamples: 0,
  });
}

describe('console ui', () => {
  let root: HTMLElement;
  let clicked: string[];
  let mounted: ReturnType<typeof mount>[];

  beforeEach(() => {
    document.body.innerHTML = '<div id="console"></div>';
    root = document.getElementById('console')!;
    clicked = [];
    mounted = [];
  });

  afterEach(() => {
    for (const ui of mounted) ui.dispose();
  });

  function mountUi() {
    const ui = mount(root, {
      onTrigger: () => clicked.push('trigger'),
      onConfirm: () => clicked.push('confirm'),
    });
    mounted.push(ui);
    return ui;
  }

  it('renders gauge values exactly as the payload carried them', () => {
    const ui = mountUi();
    const model = reduceEvent(
      sessionModel(),
      frame(0, 'metrics_update', 'reading', { metrics: METRICS, flags: FLAGS, lines: [] })
    );
    ui.update(model);
    const value = root.querySelector('[data-gauge="duration"] .gauge-value')!;
    expect(value.textContent).toBe('283.33900000000006');
    const saccade = root.querySelector('[data-gauge="saccade"] .gauge-value')!;
    expect(saccade.textContent).toBe('13.218823888332894');
    const pupil = root.querySelector('[data-gauge="pupil"] .gauge-value')!;
    expect(pupil.textContent).toBe('--');
  });

  it('marks exactly the flagged gauges as triggered', () => {
    const ui = mountUi();
    ui.update(
      reduceEvent(
        sessionModel(),
        frame(0, 'metrics_update', 'reading', { metrics: METRICS, flags: FLAGS, lines: [] })
      )
    );
    const triggered = [...root.querySelectorAll('.gauge.triggered')].map(
      (node) => (node as HTMLElement).dataset.gauge
    );
    expect(triggered.sort()).toEqual(['duration', 'saccade']);
  });

  it('shows the prompt text byte for byte in a pre element', () => {
    const ui = mountUi();
    const prompt =
      'While reading the code, the developer demonstrated short saccades indicating ' +
      'novice-like behavior and linear reading patterns, reflecting difficulty in ' +
      'identifying key code elements. Improve the code.';
    ui.update(
      reduceEvent(
        sessionModel(),
        frame(0, 'prompt_preview', 'prompt_ready', {
          prompt,
          prompt_mode: 'realtime',
          metrics: METRICS,
          flags: FLAGS,
          lines: [],
        })
      )
    );
    expect(root.querySelector('.prompt-text')!.textContent).toBe(prompt);
  });

  it('enables buttons strictly by phase', () => {
    const ui = mountUi();
    const trigger = root.querySelector('#trigger-btn') as HTMLButtonElement;
    const confirm = root.querySelector('#confirm-btn') as HTMLButtonElement;

    ui.update(sessionModel());
    expect(trigger.disabled).toBe(false);
    expect(confirm.disabled).toBe(true);

    ui.update({ ...sessionModel(), phase: 'prompt_ready' });
    expect(trigger.disabled).toBe(true);
    expect(confirm.disabled).toBe(false);

    for (const phase of ['refactoring', 'refactored', 'closed'] as const) {
      ui.update({ ...sessionModel(), phase });
      expect(trigger.disabled).toBe(true);
      expect(confirm.disabled).toBe(true);
    }
  });

  it('keyboard shortcuts obey the same gating as the buttons', () => {
    const ui = mountUi();
    ui.update(sessionModel());
    document.dispatchEvent(new KeyboardEvent('keydown', { key: 'g' }));
    document.dispatchEvent(new KeyboardEvent('keydown', { key: 'Enter' }));
    expect(clicked).toEqual(['trigger']);

    clicked.length = 0;
    ui.update({ ...sessionModel(), phase: 'prompt_ready' });
    document.dispatchEvent(new KeyboardEvent('keydown', { key: 'g' }));
    document.dispatchEvent(new KeyboardEvent('keydown', { key: 'Enter' }));
    expect(clicked).toEqual(['confirm']);

    clicked.length = 0;
    ui.update({ ...sessionModel(), phase: 'refactored' });
    document.dispatchEvent(new KeyboardEvent('keydown', { key: 'g' }));
    document.dispatchEvent(new KeyboardEvent('keydown', { key: 'Enter' }));
    expect(clicked).toEqual([]);
  });

  it('clicks only fire while the button is enabled', () => {
    const ui = mountUi();
    const trigger = root.querySelector('#trigger-btn') as HTMLButtonElement;
    ui.update(sessionModel());
    trigger.click();
    ui.update({ ...sessionModel(), phase: 'refactored' });
    trigger.click();
    expect(clicked).toEqual(['trigger']);
  });

  it('paints one list item per snippet line with heat classes', () => {
    const ui = mountUi();
    const model = reduceEvent(
      sessionModel(),
      frame(0, 'metrics_update', 'reading', {
        metrics: METRICS,
        flags: FLAGS,
        lines: [
          { line: 1, fixation_count: 2, total_fixation_ms: 100.0 },
          { line: 2, fixation_count: 9, total_fixation_ms: 2400.0 },
        ],
      })
    );
    ui.update(model);
    const rows = [...root.querySelectorAll('.code-line')];
    expect(rows).toHaveLength(3);
    expect(rows[0].textContent).toBe('int a;');
    expect(rows[0].className).toBe('code-line heat-1');
    expect(rows[1].className).toBe('code-line heat-4');
    expect(rows[2].className).toBe('code-line heat-0');
  });

  it('reflects phase and connection in the header', () => {
    const ui = mountUi();
    ui.update({ ...sessionModel(), connection: 'open', phase: 'prompt_ready' });
    expect(root.querySelector('.session-title')!.textContent).toBe('demo');
    expect(root.querySelector('.phase-badge')!.textContent).toBe('prompt_ready');
    expect(root.querySelector('.conn-badge')!.textContent).toBe('open');
  });

  it('shows the refactored code and backend after the result event', () => {
    const ui = mountUi();
    ui.update(
      reduceEvent(
        sessionModel(),
        frame(0, 'refactor_result', 'refactored', {
          refactored_code: 'import java.util.List;\n',
          backend_name: 'mock',
          note: null,
        })
      )
    );
    expect(root.querySelector('.result-code')!.textContent).toBe('import java.util.List;\n');
    expect(root.querySelector('.result-meta')!.textContent).toBe('mock');
    expect(root.querySelector('.result-pane')!.classList.contains('empty')).toBe(false);
  });
});
