// Wires the console store to a running session service: one GET for
// the session snapshot, then a websocket for the event stream, with
// reconnect picking up from the next sequence number we have not yet
// applied. Trigger and confirm go out as plain POSTs.

import { parseErrorEnvelope, parseFrame, parseSessionInfo } from './protocol.js';
import type { ConsoleViewModel } from './state.js';
import { ConsoleStore } from './state.js';

export interface ClientOptions {
  /** host:port of the session service, no scheme */
  service: string;
  sessionId: string;
  fromSeq?: number;
  retryDelayMs?: number;
}

type ModelListener = (model: ConsoleViewModel) => void;

const DEFAULT_RETRY_MS = 1500;

export class ConsoleClient {
  private store: ConsoleStore;
  private socket: WebSocket | null = null;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private disposed = false;

  constructor(
    private readonly opts: ClientOptions,
    private readonly onModel: ModelListener
  ) {
    this.store = new ConsoleStore(opts.fromSeq ?? 0);
  }

  get model(): ConsoleViewModel {
    return this.store.model;
  }

  async start(): Promise<void> {
    this.store.setConnection('connecting');
    this.emit();
    try {
      const resp = await fetch(this.sessionUrl());
      if (resp.ok) {
        const info = parseSessionInfo(await resp.text());
        if (info) this.store.setSessionInfo(info);
      } else {
        await this.noteHttpError('session info', resp);
      }
    } catch (err) {
      this.store.note('fetch_failed', `session info: ${String(err)}`);
    }
    this.openSocket();
  }

  async trigger(mode?: string): Promise<void> {
    await this.post('trigger', `${this.sessionUrl()}/trigger`, mode ? { mode } : {});
  }

  async confirm(): Promise<void> {
    await this.post('confirm', `${this.sessionUrl()}/confirm`, {});
  }

  dispose(): void {
    this.disposed = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.retryTimer = null;
    if (this.socket) this.socket.close();
    this.socket = null;
  }

  // ------------------------------------------------------------------
  // internals

  private sessionUrl(): string {
    return `http://${this.opts.service}/sessions/${this.opts.sessionId}`;
  }

  private emit(): void {
    this.onModel(this.store.model);
  }

  private async post(op: string, url: string, body: object): Promise<void> {
    try {
      const resp = await fetch(url, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(body),
      });
      if (!resp.ok) await this.noteHttpError(op, resp);
    } catch (err) {
      this.store.note('fetch_failed', `${op}: ${String(err)}`);
    }
    this.emit();
  }

  private async noteHttpError(op: string, resp: Response): Promise<void> {
    const envelope = parseErrorEnvelope(await resp.text());
    const detail = envelope ? `${envelope.code}: ${envelope.detail}` : `HTTP ${resp.status}`;
    this.store.note('service_error', `${op} refused: ${detail}`);
  }

  private openSocket(): void {
    if (this.disposed) return;
    const url =
      `ws://${this.opts.service}/sessions/${this.opts.sessionId}` +
      `/events?from_seq=${this.store.expectedSeq}`;
    const socket = new WebSocket(url);
    this.socket = socket;

    socket.onopen = () => {
      this.store.setConnection('open');
      this.emit();
    };
    socket.onmessage = (msg: MessageEvent) => {
      if (typeof msg.data !== 'string') return;
      const frame = parseFrame(msg.data);
      if (frame === null) {
        this.store.note('bad_frame', 'dropped an unparseable event frame');
        this.emit();
        return;
      }
      if (this.store.push(frame) > 0) this.emit();
    };
    socket.onclose = () => {
      if (this.socket !== socket) return;
      this.socket = null;
      if (this.disposed) return;
      this.store.setConnection('retrying');
      this.emit();
      this.retryTimer = setTimeout(() => {
        this.retryTimer = null;
        this.openSocket();
      }, this.opts.retryDelayMs ?? DEFAULT_RETRY_MS);
    };
  }
}
