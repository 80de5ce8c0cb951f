// Console view model and its reducer. Events arrive as frames, get
// released in sequence order by EventOrderer, and fold into the model
// one at a time. Every displayed value is a verbatim copy out of a
// payload; there is no client-side recomputation of metrics, flags, or
// prompt text.

import type {
  EventFrame,
  FlagsPayload,
  LineHeat,
  MetricsPayload,
  Phase,
  SessionInfo,
  ThresholdSettings,
} from './protocol.js';

export type ConnectionState = 'idle' | 'connecting' | 'open' | 'retrying' | 'closed';

export interface Gauge {
  id: 'duration' | 'count' | 'saccade' | 'pupil';
  label: string;
  unit: string;
  /** Verbatim from the latest metrics-carrying payload; null before one arrives. */
  value: number | null;
  threshold: number | null;
  triggered: boolean;
}

export interface LogEntry {
  seq: number | null; // null for console-local notes
  type: string;
  phase: Phase | null;
  text: string;
}

export interface ConsoleViewModel {
  connection: ConnectionState;
  sessionId: string | null;
  phase: Phase;
  mode: string;
  languageHint: string;
  snippet: string;
  thresholds: ThresholdSettings | null;
  gauges: Gauge[];
  heat: LineHeat[];
  promptText: string | null;
  promptMode: string | null;
  refactoredCode: string | null;
  backendName: string | null;
  backendNote: string | null;
  samplesSeen: number;
  lastSeq: number;
  eventLog: LogEntry[];
}

export interface Controls {
  trigger: boolean;
  confirm: boolean;
}

const LOG_LIMIT = 200;

const GAUGE_DEFS = [
  {
    id: 'duration',
    label: 'fixation duration',
    unit: 'ms',
    metric: 'mean_fixation_duration_ms',
    flag: 'long_fixation_duration',
    threshold: 'fixation_duration_ms',
  },
  {
    id: 'count',
    label: 'fixation rate',
    unit: '/s',
    metric: 'fixation_count_per_s',
    flag: 'high_fixation_count',
    threshold: 'fixation_count_per_s',
  },
  {
    id: 'saccade',
    label: 'saccade length',
    unit: 'px',
    metric: 'mean_saccade_length_px',
    flag: 'short_saccades',
    threshold: 'saccade_length_px',
  },
  {
    id: 'pupil',
    label: 'pupil dilation',
    unit: 'mm',
    metric: 'mean_pupil_dilation_mm',
    flag: 'high_pupil_dilation',
    threshold: 'pupil_dilation_mm',
  },
] as const;

export function emptyGauges(thresholds: ThresholdSettings | null): Gauge[] {
  return GAUGE_DEFS.map((def) => ({
    id: def.id,
    label: def.label,
    unit: def.unit,
    value: null,
    threshold: thresholds ? thresholds[def.threshold] : null,
    triggered: false,
  }));
}

export function initialModel(): ConsoleViewModel {
  return {
    connection: 'idle',
    sessionId: null,
    phase: 'reading',
    mode: 'realtime',
    languageHint: '',
    snippet: '',
    thresholds: null,
    gauges: emptyGauges(null),
    heat: [],
    promptText: null,
    promptMode: null,
    refactoredCode: null,
    backendName: null,
    backendNote: null,
    samplesSeen: 0,
    lastSeq: -1,
    eventLog: [],
  };
}

/** Which actions the UI offers. A pure function of the phase alone. */
export function controlsFor(phase: Phase): Controls {
  return {
    trigger: phase === 'reading',
    confirm: phase === 'prompt_ready',
  };
}

export function withSessionInfo(model: ConsoleViewModel, info: SessionInfo): ConsoleViewModel {
  return {
    ...model,
    sessionId: info.sessionId,
    phase: info.phase,
    mode: info.mode,
    languageHint: info.languageHint,
    snippet: info.snippet,
    thresholds: info.thresholds,
    gauges: model.gauges.every((g) => g.value === null)
      ? emptyGauges(info.thresholds)
      : model.gauges.map((g, i) => ({
          ...g,
          threshold: info.thresholds ? info.thresholds[GAUGE_DEFS[i].threshold] : null,
        })),
  };
}

export function withConnection(
  model: ConsoleViewModel,
  connection: ConnectionState
): ConsoleViewModel {
  return { ...model, connection };
}

/** Console-local note (HTTP error envelope, connection trouble). */
export function withNote(model: ConsoleViewModel, type: string, text: string): ConsoleViewModel {
  return {
    ...model,
    eventLog: appendLog(model.eventLog, { seq: null, type, phase: null, text }),
  };
}

function appendLog(log: LogEntry[], entry: LogEntry): LogEntry[] {
  const next = [...log, entry];
  return next.length > LOG_LIMIT ? next.slice(next.length - LOG_LIMIT) : next;
}

function gaugesFrom(
  model: ConsoleViewModel,
  metrics: MetricsPayload,
  flags: FlagsPayload
): Gauge[] {
  return GAUGE_DEFS.map((def, i) => ({
    ...model.gauges[i],
    value: metrics[def.metric],
    triggered: flags[def.flag],
  }));
}

function summarize(frame: EventFrame): string {
  const p = frame.payload;
  switch (frame.type) {
    case 'sample_batch':
      return `${p['count']} samples (${p['first_us']}..${p['last_us']} us)`;
    case 'metrics_update':
      return 'metrics updated';
    case 'geometry_update':
      return 'geometry updated';
    case 'trigger_prompt':
      return `trigger (${p['mode']})`;
    case 'prompt_preview':
      return `prompt ready (${p['prompt_mode']})`;
    case 'refactor_result':
      return `refactored by ${p['backend_name']}`;
    case 'error':
      return `${p['code']}: ${p['detail']}`;
  }
}

/** Fold one in-order event frame into the model. */
export function reduceEvent(model: ConsoleViewModel, frame: EventFrame): ConsoleViewModel {
  const next: ConsoleViewModel = {
    ...model,
    phase: frame.phase,
    lastSeq: frame.seq,
    eventLog: appendLog(model.eventLog, {
      seq: frame.seq,
      type: frame.type,
      phase: frame.phase,
      text: summarize(frame),
    }),
  };
  const p = frame.payload;
  switch (frame.type) {
    case 'sample_batch':
      next.samplesSeen = model.samplesSeen + ((p['count'] as number) ?? 0);
      break;
    case 'metrics_update':
    case 'prompt_preview': {
      const metrics = p['metrics'] as MetricsPayload | undefined;
      const flags = p['flags'] as FlagsPayload | undefined;
      if (metrics && flags) next.gauges = gaugesFrom(model, metrics, flags);
      if (Array.isArray(p['lines'])) next.heat = p['lines'] as LineHeat[];
      if (frame.type === 'prompt_preview') {
        next.promptText = p['prompt'] as string;
        next.promptMode = p['prompt_mode'] as string;
      }
      break;
    }
    case 'refactor_result':
      next.refactoredCode = p['refactored_code'] as string;
      next.backendName = p['backend_name'] as string;
      next.backendNote = (p['note'] as string | null) ?? null;
      break;
    case 'geometry_update':
    case 'trigger_prompt':
    case 'error':
      break;
  }
  return next;
}

/** Releases frames in contiguous sequence order. Frames arriving early
 * are held, duplicates and frames from the past are dropped. */
export class EventOrderer {
  private pending = new Map<number, EventFrame>();
  private nextSeq: number;

  constructor(fromSeq = 0) {
    this.nextSeq = fromSeq;
  }

  get expectedSeq(): number {
    return this.nextSeq;
  }

  get pendingCount(): number {
    return this.pending.size;
  }

  push(frame: EventFrame): EventFrame[] {
    if (frame.seq < this.nextSeq || this.pending.has(frame.seq)) return [];
    this.pending.set(frame.seq, frame);
    const ready: EventFrame[] = [];
    let frame2 = this.pending.get(this.nextSeq);
    while (frame2 !== undefined) {
      this.pending.delete(this.nextSeq);
      ready.push(frame2);
      this.nextSeq += 1;
      frame2 = this.pending.get(this.nextSeq);
    }
    return ready;
  }
}

/** Orderer plus reducer under one roof; what the client and the tests
 * actually drive. */
export class ConsoleStore {
  model: ConsoleViewModel;
  private orderer: EventOrderer;

  constructor(fromSeq = 0) {
    this.model = initialModel();
    this.orderer = new EventOrderer(fromSeq);
  }

  get expectedSeq(): number {
    return this.orderer.expectedSeq;
  }

  /** Returns the number of frames applied (0 if buffered or dropped). */
  push(frame: EventFrame): number {
    const ready = this.orderer.push(frame);
    for (const f of ready) {
      this.model = reduceEvent(this.model, f);
    }
    return ready.length;
  }

  setSessionInfo(info: SessionInfo): void {
    this.model = withSessionInfo(this.model, info);
  }

  setConnection(state: ConnectionState): void {
    this.model = withConnection(this.model, state);
  }

  note(type: string, text: string): void {
    this.model = withNote(this.model, type, text);
  }
}
