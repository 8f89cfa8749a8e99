/**
 * Overlay viewport: shows the latest server-rendered overlay image.
 * Object URLs are recreated only when a newer overlay sequence lands
 * and the previous URL is revoked to avoid leaking blobs.
 */

import { AnnotatorStore, type AnnotatorSnapshot } from './state.js';

export class OverlayViewport {
  readonly element: HTMLElement;
  private readonly image: HTMLImageElement;
  private readonly caption: HTMLElement;
  private shownSeq = 0;
  private objectUrl: string | null = null;

  constructor(store: AnnotatorStore) {
    this.element = document.createElement('figure');
    this.element.className = 'viewport';
    this.image = document.createElement('img');
    this.image.alt = 'silhouette overlay';
    this.caption = document.createElement('figcaption');
    this.caption.textContent = 'no session';
    this.element.append(this.image, this.caption);
    store.subscribe((snapshot) => this.render(snapshot));
    this.render(store.snapshot());
  }

  private render(snapshot: AnnotatorSnapshot): void {
    if (snapshot.session === null) {
      this.caption.textContent = 'no session';
      return;
    }
    const busy = snapshot.busy !== null ? ` — ${snapshot.busy}…` : '';
    this.caption.textContent =
      `${snapshot.session.image_path} (${snapshot.session.width}×${snapshot.session.height})${busy}`;
    if (snapshot.overlayBlob === null || snapshot.overlaySeq === this.shownSeq) return;
    this.shownSeq = snapshot.overlaySeq;
    const url = URL.createObjectURL(snapshot.overlayBlob);
    if (this.objectUrl !== null) URL.revokeObjectURL(this.objectUrl);
    this.objectUrl = url;
    this.image.src = url;
  }
}
