/**
 * Parameter panel: one row per pose field with a slider, a numeric input,
 * and a fine/coarse step toggle. Keyboard up/down on the numeric input
 * nudges by the active step (shift = 10x).
 */

import { AnnotatorStore, type AnnotatorSnapshot } from './state.js';
import { PARAM_META, POSE_FIELDS, type PoseField } from './types.js';

interface Row {
  field: PoseField;
  slider: HTMLInputElement;
  input: HTMLInputElement;
  toggle: HTMLButtonElement;
  message: HTMLSpanElement;
}

export class ParameterPanel {
  readonly element: HTMLElement;
  private readonly rows: Row[] = [];

  constructor(private readonly store: AnnotatorStore) {
    this.element = document.createElement('div');
    this.element.className = 'panel';
    for (const field of POSE_FIELDS) {
      this.rows.push(this.buildRow(field));
    }
    store.subscribe((snapshot) => this.render(snapshot));
    this.render(store.snapshot());
  }

  private buildRow(field: PoseField): Row {
    const meta = PARAM_META[field];

    const row = document.createElement('div');
    row.className = 'panel-row';

    const label = document.createElement('label');
    label.textContent = meta.unit ? `${meta.label} (${meta.unit})` : meta.label;
    label.htmlFor = `param-${field}`;

    const slider = document.createElement('input');
    slider.type = 'range';
    slider.min = String(meta.min);
    slider.max = String(meta.max);
    slider.step = String(meta.fineStep);
    slider.addEventListener('input', () => {
      this.store.editField(field, Number(slider.value));
    });

    const input = document.createElement('input');
    input.type = 'text';
    input.id = `param-${field}`;
    input.className = 'panel-number';
    input.inputMode = 'decimal';
    input.addEventListener('change', () => {
      this.store.editFieldRaw(field, input.value);
    });
    input.addEventListener('keydown', (event) => {
      if (event.key !== 'ArrowUp' && event.key !== 'ArrowDown') return;
      event.preventDefault();
      const direction = event.key === 'ArrowUp' ? 1 : -1;
      this.store.nudge(field, direction, event.shiftKey ? 10 : 1);
    });

    const toggle = document.createElement('button');
    toggle.type = 'button';
    toggle.className = 'panel-toggle';
    toggle.title = 'toggle fine/coarse step';
    toggle.addEventListener('click', () => this.store.toggleFineStep(field));

    const message = document.createElement('span');
    message.className = 'panel-message';

    row.append(label, slider, input, toggle, message);
    this.element.append(row);
    return { field, slider, input, toggle, message };
  }

  private render(snapshot: AnnotatorSnapshot): void {
    const pose = snapshot.displayedPose;
    const active = document.activeElement;
    for (const row of this.rows) {
      const meta = PARAM_META[row.field];
      const enabled = pose !== null;
      row.slider.disabled = !enabled;
      row.input.disabled = !enabled;
      row.toggle.disabled = !enabled;

      const fine = snapshot.fineFields.includes(row.field);
      row.toggle.textContent = fine ? 'fine' : 'coarse';
      row.toggle.classList.toggle('fine', fine);

      const invalid = snapshot.invalidFields[row.field];
      row.message.textContent = invalid ?? '';
      row.input.classList.toggle('invalid', invalid !== undefined);

      if (pose === null) continue;
      const value = pose[row.field];
      if (row.slider !== active) {
        // widen the slider range when the session uses values outside it
        if (value < Number(row.slider.min)) row.slider.min = String(Math.floor(value));
        if (value > Number(row.slider.max)) row.slider.max = String(Math.ceil(value));
        row.slider.value = String(value);
      }
      // never clobber the field the user is typing in
      if (row.input !== active && invalid === undefined) {
        row.input.value = value.toFixed(meta.decimals);
      }
    }
  }
}
