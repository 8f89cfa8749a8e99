/**
 * Application shell: session form, work queue, refine/save actions, and
 * status bar, wired around the AnnotatorStore.
 *
 * The optional work queue is a `queue.json` file served next to the page:
 * a JSON list of create-session bodies. "Load next" walks through it.
 */

import { AnnotatorStore, type AnnotatorSnapshot } from './state.js';
import { ParameterPanel } from './panel.js';
import { OverlayViewport } from './viewport.js';
import type { CreateSessionRequest } from './types.js';

export class App {
  readonly element: HTMLElement;
  private queue: CreateSessionRequest[] = [];
  private queueIndex = 0;

  private readonly imageInput: HTMLInputElement;
  private readonly meshInput: HTMLInputElement;
  private readonly maskInput: HTMLInputElement;
  private readonly loadButton: HTMLButtonElement;
  private readonly nextButton: HTMLButtonElement;
  private readonly refineButton: HTMLButtonElement;
  private readonly saveButton: HTMLButtonElement;
  private readonly refineInfo: HTMLElement;
  private readonly statusBar: HTMLElement;

  constructor(private readonly store: AnnotatorStore) {
    this.element = document.createElement('div');
    this.element.className = 'app';

    const form = document.createElement('form');
    form.className = 'session-form';
    this.imageInput = textInput('image path', 'data/photo_001.png');
    this.meshInput = textInput('mesh path', 'data/car.obj');
    this.maskInput = textInput('reference mask (optional)', '');
    this.loadButton = button('Load session', 'submit');
    this.nextButton = button('Load next');
    form.append(
      labelled('Image', this.imageInput),
      labelled('Mesh', this.meshInput),
      labelled('Mask', this.maskInput),
      this.loadButton,
      this.nextButton,
    );
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.loadFromForm();
    });
    this.nextButton.addEventListener('click', () => void this.loadNext());

    const viewport = new OverlayViewport(store);
    const panel = new ParameterPanel(store);

    const actions = document.createElement('div');
    actions.className = 'actions';
    this.refineButton = button('Refine');
    this.refineButton.addEventListener('click', () => void this.store.refine());
    this.saveButton = button('Save');
    this.saveButton.addEventListener('click', () => void this.store.save());
    this.refineInfo = document.createElement('span');
    this.refineInfo.className = 'refine-info';
    actions.append(this.refineButton, this.saveButton, this.refineInfo);

    this.statusBar = document.createElement('div');
    this.statusBar.className = 'status-bar';

    this.element.append(form, viewport.element, panel.element, actions, this.statusBar);

    store.subscribe((snapshot) => this.render(snapshot));
    this.render(store.snapshot());
    void this.fetchQueue();
  }

  private async loadFromForm(): Promise<void> {
    const body: CreateSessionRequest = {
      image_path: this.imageInput.value.trim(),
      mesh_path: this.meshInput.value.trim(),
    };
    const mask = this.maskInput.value.trim();
    if (mask !== '') body.semantic_mask_path = mask;
    await this.store.loadSession(body);
  }

  private async fetchQueue(): Promise<void> {
    try {
      const response = await fetch('queue.json');
      if (!response.ok) return;
      const entries = (await response.json()) as CreateSessionRequest[];
      if (Array.isArray(entries)) this.queue = entries;
    } catch {
      // no queue file; manual form entry only
    }
    this.render(this.store.snapshot());
  }

  private async loadNext(): Promise<void> {
    if (this.queueIndex >= this.queue.length) return;
    const body = this.queue[this.queueIndex];
    this.queueIndex += 1;
    this.imageInput.value = body.image_path;
    this.meshInput.value = body.mesh_path;
    this.maskInput.value = body.semantic_mask_path ?? '';
    await this.store.loadSession(body);
  }

  private render(snapshot: AnnotatorSnapshot): void {
    const idle = snapshot.busy === null;
    this.loadButton.disabled = !idle;
    this.nextButton.disabled = !idle || this.queueIndex >= this.queue.length;
    this.nextButton.textContent =
      this.queue.length > 0
        ? `Load next (${this.queueIndex}/${this.queue.length})`
        : 'Load next';
    this.refineButton.disabled = !idle || !snapshot.canRefine;
    this.refineButton.title = snapshot.canRefine
      ? 'run silhouette alignment'
      : 'needs a reference mask';
    this.saveButton.disabled = !idle || snapshot.session === null;

    const outcome = snapshot.refineOutcome;
    if (outcome !== null) {
      const delta = outcome.iouFinal - outcome.iouInitial;
      const sign = delta >= 0 ? '+' : '';
      this.refineInfo.textContent =
        `IoU ${outcome.iouFinal.toFixed(3)} ` +
        `(was ${outcome.iouInitial.toFixed(3)}, ${sign}${delta.toFixed(3)}; ` +
        `${outcome.sweeps} sweeps${outcome.converged ? '' : ', hit sweep limit'})`;
    } else {
      this.refineInfo.textContent = '';
    }

    if (snapshot.error !== null) {
      this.statusBar.textContent = snapshot.error;
      this.statusBar.className = 'status-bar error';
    } else if (snapshot.lastSavedPath !== null && snapshot.session?.dirty === false) {
      this.statusBar.textContent = `saved ${snapshot.lastSavedPath}`;
      this.statusBar.className = 'status-bar';
    } else if (snapshot.session !== null) {
      const dirty = snapshot.session.dirty ? ' (unsaved changes)' : '';
      this.statusBar.textContent = `stage: ${snapshot.session.stage}${dirty}`;
      this.statusBar.className = 'status-bar';
    } else {
      this.statusBar.textContent = 'load a session to begin';
      this.statusBar.className = 'status-bar';
    }
  }
}

function textInput(placeholder: string, value: string): HTMLInputElement {
  const input = document.createElement('input');
  input.type = 'text';
  input.placeholder = placeholder;
  input.value = value;
  return input;
}

function labelled(text: string, input: HTMLInputElement): HTMLLabelElement {
  const label = document.createElement('label');
  label.textContent = text;
  label.append(input);
  return label;
}

function button(text: string, type: 'button' | 'submit' = 'button'): HTMLButtonElement {
  const el = document.createElement('button');
  el.type = type;
  el.textContent = text;
  return el;
}
