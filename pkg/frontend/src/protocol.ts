// Wire protocol of the session service, client side. One JSON frame per
// event over the WebSocket, plus the payload shapes the console cares
// about. Everything here is parsing and guards; the console never
// recomputes metrics, flags, or prompt text from raw data.

export const PROTOCOL_VERSION = 1;

export type Phase = 'reading' | 'prompt_ready' | 'refactoring' | 'refactored' | 'closed';

export type EventType =
  | 'sample_batch'
  | 'metrics_update'
  | 'geometry_update'
  | 'trigger_prompt'
  | 'prompt_preview'
  | 'refactor_result'
  | 'error';

const PHASES: ReadonlySet<string> = new Set([
  'reading',
  'prompt_ready',
  'refactoring',
  'refactored',
  'closed',
]);

const EVENT_TYPES: ReadonlySet<string> = new Set([
  'sample_batch',
  'metrics_update',
  'geometry_update',
  'trigger_prompt',
  'prompt_preview',
  'refactor_result',
  'error',
]);

export interface MetricsPayload {
  mean_fixation_duration_ms: number | null;
  fixation_count_per_s: number | null;
  mean_saccade_length_px: number | null;
  mean_pupil_dilation_mm: number | null;
  n_fixations: number;
  n_pupil_samples: number;
  baseline_pupil_mm: number | null;
  total_time_ms: number;
}

export interface FlagsPayload {
  long_fixation_duration: boolean;
  high_fixation_count: boolean;
  short_saccades: boolean;
  high_pupil_dilation: boolean;
}

export interface LineHeat {
  line: number;
  fixation_count: number;
  total_fixation_ms: number;
}

export interface ThresholdSettings {
  fixation_duration_ms: number;
  fixation_count_per_s: number;
  saccade_length_px: number;
  pupil_dilation_mm: number;
  saccade_trigger_direction: 'below' | 'above';
}

export interface EventFrame {
  protocolVersion: number;
  sessionId: string;
  seq: number;
  type: EventType;
  phase: Phase;
  payload: Record<string, unknown>;
}

export interface SessionInfo {
  sessionId: string;
  phase: Phase;
  mode: string;
  languageHint: string;
  snippet: string;
  thresholds: ThresholdSettings | null;
  nSamples: number;
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === 'object' && v !== null && !Array.isArray(v);
}

function fromJson(text: string): unknown {
  try {
    return JSON.parse(text);
  } catch {
    return undefined;
  }
}

/** Parse one inbound WS frame from its wire text. Malformed frames
 * return null; the caller decides how loudly to complain. */
export function parseFrame(text: string): EventFrame | null {
  const raw = fromJson(text);
  if (!isRecord(raw)) return null;
  if (raw['protocol_version'] !== PROTOCOL_VERSION) return null;
  const seq = raw['seq'];
  const type = raw['type'];
  const phase = raw['phase'];
  const sessionId = raw['session_id'];
  if (typeof seq !== 'number' || !Number.isInteger(seq) || seq < 0) return null;
  if (typeof type !== 'string' || !EVENT_TYPES.has(type)) return null;
  if (typeof phase !== 'string' || !PHASES.has(phase)) return null;
  if (typeof sessionId !== 'string' || sessionId.length === 0) return null;
  const payload = raw['payload'];
  if (!isRecord(payload)) return null;
  return {
    protocolVersion: PROTOCOL_VERSION,
    sessionId,
    seq,
    type: type as EventType,
    phase: phase as Phase,
    payload,
  };
}

export function parseThresholds(raw: unknown): ThresholdSettings | null {
  if (!isRecord(raw)) return null;
  const keys = [
    'fixation_duration_ms',
    'fixation_count_per_s',
    'saccade_length_px',
    'pupil_dilation_mm',
  ] as const;
  for (const key of keys) {
    if (typeof raw[key] !== 'number') return null;
  }
  const direction = raw['saccade_trigger_direction'];
  if (direction !== 'below' && direction !== 'above') return null;
  return {
    fixation_duration_ms: raw['fixation_duration_ms'] as number,
    fixation_count_per_s: raw['fixation_count_per_s'] as number,
    saccade_length_px: raw['saccade_length_px'] as number,
    pupil_dilation_mm: raw['pupil_dilation_mm'] as number,
    saccade_trigger_direction: direction,
  };
}

/** Parse the GET /sessions/{id} body. */
export function parseSessionInfo(text: string): SessionInfo | null {
  const raw = fromJson(text);
  if (!isRecord(raw)) return null;
  const sessionId = raw['session_id'];
  const phase = raw['phase'];
  const snippet = raw['snippet'];
  if (typeof sessionId !== 'string' || sessionId.length === 0) return null;
  if (typeof phase !== 'string' || !PHASES.has(phase)) return null;
  if (typeof snippet !== 'string') return null;
  return {
    sessionId,
    phase: phase as Phase,
    mode: typeof raw['mode'] === 'string' ? (raw['mode'] as string) : 'realtime',
    languageHint:
      typeof raw['language_hint'] === 'string' ? (raw['language_hint'] as string) : '',
    snippet,
    thresholds: parseThresholds(raw['thresholds']),
    nSamples: typeof raw['n_samples'] === 'number' ? (raw['n_samples'] as number) : 0,
  };
}

/** Error envelope of non-2xx control responses. */
export function parseErrorEnvelope(text: string): { code: string; detail: string } | null {
  const raw = fromJson(text);
  if (!isRecord(raw) || !isRecord(raw['error'])) return null;
  const err = raw['error'] as Record<string, unknown>;
  if (typeof err['code'] !== 'string') return null;
  return {
    code: err['code'],
    detail: typeof err['detail'] === 'string' ? err['detail'] : '',
  };
}
