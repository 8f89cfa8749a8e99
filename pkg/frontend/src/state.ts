/**
 * Annotation session store.
 *
 * UI state is a pure function of (last server-acknowledged pose, in-flight
 * edits): the displayed pose is always the acknowledged pose with the
 * pending validated edits merged on top, and once a PUT is acknowledged the
 * displayed pose equals the server-validated pose exactly.
 *
 * Edit flow: field edits are validated locally; invalid values are flagged
 * and never sent. Valid edits open (or join) a debounce window of at least
 * 30 ms; when the window closes, exactly one PUT carries the merged pose,
 * and its acknowledgement triggers exactly one overlay fetch. Overlay
 * responses carry a sequence number and stale (out-of-order) responses are
 * discarded.
 */

import type { SessionClient } from './client.js';
import {
  PARAM_META,
  type CreateSessionRequest,
  type PoseField,
  type PoseParams,
  type RefinerConfigOverrides,
  type SaveRequest,
  type SessionState,
  validateFieldValue,
} from './types.js';

/** Minimum width of the edit-coalescing window. */
export const MIN_DEBOUNCE_MS = 30;

export type BusyKind = 'load' | 'put' | 'refine' | 'save' | null;

export interface RefineOutcome {
  iouInitial: number;
  iouFinal: number;
  sweeps: number;
  converged: boolean;
}

export interface AnnotatorSnapshot {
  session: SessionState | null;
  /** Last pose the server acknowledged (create, PUT, or refine response). */
  ackedPose: PoseParams | null;
  /** Acked pose with pending validated edits merged on top. */
  displayedPose: PoseParams | null;
  pendingFields: PoseField[];
  /** Field -> error message for entries that were flagged, not sent. */
  invalidFields: Partial<Record<PoseField, string>>;
  fineFields: PoseField[];
  overlaySeq: number;
  overlayBlob: Blob | null;
  busy: BusyKind;
  canRefine: boolean;
  refineOutcome: RefineOutcome | null;
  lastSavedPath: string | null;
  error: string | null;
}

export interface AnnotatorOptions {
  client: SessionClient;
  /** Clamped up to MIN_DEBOUNCE_MS. */
  debounceMs?: number;
}

type Listener = (snapshot: AnnotatorSnapshot) => void;

export class AnnotatorStore {
  private readonly client: SessionClient;
  private readonly debounceMs: number;
  private readonly listeners = new Set<Listener>();

  private session: SessionState | null = null;
  private ackedPose: PoseParams | null = null;
  private pendingEdits = new Map<PoseField, number>();
  private invalidEdits = new Map<PoseField, string>();
  private fineFields = new Set<PoseField>();

  private flushTimer: ReturnType<typeof setTimeout> | null = null;
  private putPromise: Promise<void> | null = null;

  private overlayRequestSeq = 0;
  private overlayAppliedSeq = 0;
  private overlayBlob: Blob | null = null;

  private busy: BusyKind = null;
  private refineOutcome: RefineOutcome | null = null;
  private lastSavedPath: string | null = null;
  private error: string | null = null;

  constructor(options: AnnotatorOptions) {
    this.client = options.client;
    this.debounceMs = Math.max(MIN_DEBOUNCE_MS, options.debounceMs ?? MIN_DEBOUNCE_MS);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  snapshot(): AnnotatorSnapshot {
    return {
      session: this.session,
      ackedPose: this.ackedPose,
      displayedPose: this.displayedPose(),
      pendingFields: [...this.pendingEdits.keys()],
      invalidFields: Object.fromEntries(this.invalidEdits) as Partial<Record<PoseField, string>>,
      fineFields: [...this.fineFields],
      overlaySeq: this.overlayAppliedSeq,
      overlayBlob: this.overlayBlob,
      busy: this.busy,
      canRefine: this.canRefine(),
      refineOutcome: this.refineOutcome,
      lastSavedPath: this.lastSavedPath,
      error: this.error,
    };
  }

  canRefine(): boolean {
    return this.session !== null && this.session.has_reference;
  }

  displayedPose(): PoseParams | null {
    if (this.ackedPose === null) return null;
    const pose = { ...this.ackedPose };
    for (const [field, value] of this.pendingEdits) {
      pose[field] = value;
    }
    return pose;
  }

  // -------------------------------------------------------------------------
  // Session lifecycle
  // -------------------------------------------------------------------------

  async loadSession(body: CreateSessionRequest): Promise<SessionState | null> {
    this.cancelFlushTimer();
    this.busy = 'load';
    this.emit();
    try {
      const session = await this.client.createSession(body);
      this.session = session;
      this.ackedPose = { ...session.pose };
      this.pendingEdits.clear();
      this.invalidEdits.clear();
      this.refineOutcome = null;
      this.lastSavedPath = null;
      this.overlayRequestSeq = 0;
      this.overlayAppliedSeq = 0;
      this.overlayBlob = null;
      this.error = null;
      this.busy = null;
      this.emit();
      await this.refreshOverlay();
      return session;
    } catch (err) {
      this.busy = null;
      this.error = messageOf(err);
      this.emit();
      return null;
    }
  }

  // -------------------------------------------------------------------------
  // Pose editing
  // -------------------------------------------------------------------------

  /** Slider/keyboard edit with an already-numeric value. */
  editField(field: PoseField, value: number): void {
    this.applyEdit(field, value);
  }

  /** Manual text entry; blank or unparseable input is flagged, not sent. */
  editFieldRaw(field: PoseField, raw: string): void {
    const trimmed = raw.trim();
    if (trimmed === '') {
      this.invalidEdits.set(field, 'enter a number');
      this.emit();
      return;
    }
    this.applyEdit(field, Number(trimmed));
  }

  /** Nudge by the field's current fine/coarse step. */
  nudge(field: PoseField, direction: 1 | -1, multiplier = 1): void {
    const pose = this.displayedPose();
    if (pose === null) return;
    const value = pose[field] + direction * multiplier * this.stepFor(field);
    this.applyEdit(field, roundStep(value));
  }

  toggleFineStep(field: PoseField): void {
    if (this.fineFields.has(field)) {
      this.fineFields.delete(field);
    } else {
      this.fineFields.add(field);
    }
    this.emit();
  }

  stepFor(field: PoseField): number {
    const meta = PARAM_META[field];
    return this.fineFields.has(field) ? meta.fineStep : meta.coarseStep;
  }

  private applyEdit(field: PoseField, value: number): void {
    if (this.session === null) return;
    const error = validateFieldValue(field, value);
    if (error !== null) {
      this.invalidEdits.set(field, error);
      this.emit();
      return;
    }
    this.invalidEdits.delete(field);
    this.pendingEdits.set(field, value);
    this.emit();
    this.scheduleFlush();
  }

  // -------------------------------------------------------------------------
  // Debounced PUT
  // -------------------------------------------------------------------------

  private scheduleFlush(): void {
    if (this.flushTimer !== null) return; // window already open: coalesce
    this.flushTimer = setTimeout(() => {
      this.flushTimer = null;
      void this.flushPending();
    }, this.debounceMs);
  }

  private cancelFlushTimer(): void {
    if (this.flushTimer !== null) {
      clearTimeout(this.flushTimer);
      this.flushTimer = null;
    }
  }

  /** Push pending edits now (used before refine/save and by the timer). */
  async flushNow(): Promise<void> {
    this.cancelFlushTimer();
    await this.flushPending();
  }

  private async flushPending(): Promise<void> {
    while (this.putPromise !== null) {
      await this.putPromise;
    }
    if (this.session === null || this.ackedPose === null) return;
    if (this.pendingEdits.size === 0) return;
    this.putPromise = this.doPut();
    try {
      await this.putPromise;
    } finally {
      this.putPromise = null;
    }
  }

  private async doPut(): Promise<void> {
    const session = this.session!;
    const sent = new Map(this.pendingEdits);
    const pose = { ...this.ackedPose! };
    for (const [field, value] of sent) {
      pose[field] = value;
    }
    this.busy = 'put';
    this.emit();
    try {
      const ack = await this.client.putPose(session.session_id, pose);
      this.ackedPose = { ...ack.pose };
      this.session = { ...session, pose: this.ackedPose, stage: 'human', dirty: true };
      // drop only the edits this PUT carried; later edits stay pending
      for (const [field, value] of sent) {
        if (this.pendingEdits.get(field) === value) {
          this.pendingEdits.delete(field);
        }
      }
      this.error = null;
      this.busy = null;
      this.emit();
      await this.refreshOverlay();
    } catch (err) {
      this.busy = null;
      this.error = messageOf(err);
      this.emit();
    }
  }

  // -------------------------------------------------------------------------
  // Overlay (server-rendered; stale responses dropped by sequence number)
  // -------------------------------------------------------------------------

  async refreshOverlay(): Promise<void> {
    if (this.session === null || this.ackedPose === null) return;
    const seq = ++this.overlayRequestSeq;
    let blob: Blob;
    try {
      blob = await this.client.getOverlay(this.session.session_id, this.ackedPose);
    } catch (err) {
      if (seq > this.overlayAppliedSeq) {
        this.error = messageOf(err);
        this.emit();
      }
      return;
    }
    if (seq <= this.overlayAppliedSeq) return; // a newer response already landed
    this.overlayAppliedSeq = seq;
    this.overlayBlob = blob;
    this.emit();
  }

  // -------------------------------------------------------------------------
  // Workflow actions
  // -------------------------------------------------------------------------

  async refine(config?: RefinerConfigOverrides): Promise<RefineOutcome | null> {
    if (this.session === null) return null;
    if (!this.canRefine()) {
      this.error = 'refine needs a reference mask';
      this.emit();
      return null;
    }
    await this.flushNow();
    this.busy = 'refine';
    this.emit();
    try {
      const result = await this.client.refine(this.session.session_id, config);
      this.ackedPose = { ...result.pose };
      this.session = { ...this.session, pose: this.ackedPose, stage: 'refined', dirty: true };
      this.refineOutcome = {
        iouInitial: result.iou_initial,
        iouFinal: result.iou_final,
        sweeps: result.sweeps,
        converged: result.converged,
      };
      this.error = null;
      this.busy = null;
      this.emit();
      await this.refreshOverlay();
      return this.refineOutcome;
    } catch (err) {
      this.busy = null;
      this.error = messageOf(err);
      this.emit();
      return null;
    }
  }

  async save(body?: SaveRequest): Promise<string | null> {
    if (this.session === null) return null;
    await this.flushNow();
    this.busy = 'save';
    this.emit();
    try {
      const result = await this.client.save(this.session.session_id, body);
      this.lastSavedPath = result.path;
      this.session = { ...this.session, dirty: false };
      this.error = null;
      this.busy = null;
      this.emit();
      return result.path;
    } catch (err) {
      this.busy = null;
      this.error = messageOf(err);
      this.emit();
      return null;
    }
  }

  // -------------------------------------------------------------------------

  private emit(): void {
    const snapshot = this.snapshot();
    for (const listener of this.listeners) {
      listener(snapshot);
    }
  }
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

/** Trim float noise from accumulated nudges (e.g. 0.30000000000000004). */
function roundStep(value: number): number {
  return Math.round(value * 1e6) / 1e6;
}
