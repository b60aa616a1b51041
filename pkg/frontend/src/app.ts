/* DOM wiring: toolbar, canvas events, and the service round trips. */

import { ApiClient, Kind, LineType } from "./api.js";
import { buildScene } from "./scene.js";
import { draw } from "./render.js";
import {
  CanvasState,
  adjustSlant,
  annotationsForSave,
  curveFailed,
  curveLoaded,
  initialState,
  previewLoaded,
  saveApplied,
  snapApplied,
  undoPending,
} from "./state.js";
import { ViewTransform, boundsOf } from "./view.js";

interface Elements {
  classSelect: HTMLSelectElement;
  typeSelect: HTMLSelectElement;
  kindToggle: HTMLSelectElement;
  slantInput: HTMLInputElement;
  slantDown: HTMLButtonElement;
  slantUp: HTMLButtonElement;
  widthReadout: HTMLElement;
  undoButton: HTMLButtonElement;
  saveButton: HTMLButtonElement;
  previewFile: HTMLInputElement;
  previewSteps: HTMLInputElement;
  previewButton: HTMLButtonElement;
  banner: HTMLElement;
  toast: HTMLElement;
  canvas: HTMLCanvasElement;
}

export class App {
  state: CanvasState = initialState();
  private view: ViewTransform | null = null;

  constructor(private api: ApiClient, private el: Elements) {}

  async start(): Promise<void> {
    this.el.classSelect.addEventListener("change", () => {
      void this.loadClass(this.el.classSelect.value);
    });
    this.el.canvas.addEventListener("click", (ev) => void this.onCanvasClick(ev));
    this.el.undoButton.addEventListener("click", () => this.setState(undoPending(this.state)));
    this.el.saveButton.addEventListener("click", () => void this.save());
    this.el.slantDown.addEventListener("click", () => this.setState(adjustSlant(this.state, -1)));
    this.el.slantUp.addEventListener("click", () => this.setState(adjustSlant(this.state, +1)));
    this.el.slantInput.addEventListener("change", () => {
      const target = Number(this.el.slantInput.value) || 0;
      this.setState(adjustSlant(this.state, target - this.state.slantDeg));
    });
    this.el.previewButton.addEventListener("click", () => void this.preview());
    try {
      const classes = await this.api.listClasses();
      this.el.classSelect.innerHTML = "";
      for (const c of classes) {
        const opt = document.createElement("option");
        opt.value = c.class_id;
        opt.textContent = `${c.class_id} (${c.annotation_count} pts)`;
        this.el.classSelect.appendChild(opt);
      }
      if (classes.length > 0) {
        await this.loadClass(classes[0].class_id);
      }
    } catch (exc) {
      this.setState(curveFailed(this.state, `service unreachable: ${String(exc)}`));
    }
  }

  async loadClass(classId: string): Promise<void> {
    try {
      const payload = await this.api.curve(classId);
      this.setState(curveLoaded(this.state, classId, payload));
    } catch (exc) {
      this.setState(curveFailed({ ...this.state, classId }, String(exc)));
    }
  }

  private async onCanvasClick(ev: MouseEvent): Promise<void> {
    if (!this.state.classId || !this.state.curve || !this.view) {
      return;
    }
    const rect = this.el.canvas.getBoundingClientRect();
    const [wx, wy] = this.view.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
    const type = this.el.typeSelect.value as LineType;
    const kind = this.el.kindToggle.value as Kind;
    try {
      const resp = await this.api.snap(this.state.classId, { point: [wx, wy], kind });
      this.setState(snapApplied(this.state, type, kind, resp));
    } catch (exc) {
      this.setState({ ...this.state, toast: String(exc) });
    }
  }

  private async save(): Promise<void> {
    if (!this.state.classId) {
      return;
    }
    try {
      const payload = await this.api.saveAnnotations(
        this.state.classId,
        annotationsForSave(this.state),
        this.state.slantDeg,
        this.state.revision ?? undefined,
      );
      this.setState(saveApplied(this.state, payload));
      await this.loadClass(this.state.classId); // markers come back from the server
    } catch (exc) {
      this.setState({ ...this.state, toast: `save failed: ${String(exc)}` });
    }
  }

  private async preview(): Promise<void> {
    const file = this.el.previewFile.files && this.el.previewFile.files[0];
    if (!file || !this.state.classId) {
      return;
    }
    const steps = Math.max(1, Math.round(Number(this.el.previewSteps.value) || 3));
    try {
      const ink = JSON.parse(await file.text());
      const payload = await this.api.preview(this.state.classId, ink, steps);
      this.setState(previewLoaded(this.state, payload.reports));
    } catch (exc) {
      this.setState({ ...this.state, toast: `preview failed: ${String(exc)}` });
    }
  }

  setState(next: CanvasState): void {
    this.state = next;
    this.renderAll();
  }

  private renderAll(): void {
    const { banner, toast, canvas, slantInput, widthReadout } = this.el;
    banner.textContent = this.state.error ?? "";
    banner.style.display = this.state.error ? "block" : "none";
    toast.textContent = this.state.toast ?? "";
    toast.style.display = this.state.toast ? "block" : "none";
    slantInput.value = String(this.state.slantDeg);
    widthReadout.textContent =
      this.state.widthReadout === null ? "-" : this.state.widthReadout.toFixed(4);
    const ctx = canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    const scene = buildScene(this.state);
    if (scene.polyline.length === 0) {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      this.view = null;
      return;
    }
    const everything = scene.polyline.concat(...scene.previewPolylines);
    this.view = new ViewTransform(boundsOf(everything), canvas.width, canvas.height);
    draw(ctx, scene, this.view, canvas.width, canvas.height);
  }
}

export function bootstrap(): void {
  const must = <T extends HTMLElement>(id: string): T => {
    const node = document.getElementById(id);
    if (!node) {
      throw new Error(`missing element #${id}`);
    }
    return node as T;
  };
  const app = new App(new ApiClient(""), {
    classSelect: must("class-select"),
    typeSelect: must("type-select"),
    kindToggle: must("kind-toggle"),
    slantInput: must("slant-input"),
    slantDown: must("slant-down"),
    slantUp: must("slant-up"),
    widthReadout: must("width-readout"),
    undoButton: must("undo-button"),
    saveButton: must("save-button"),
    previewFile: must("preview-file"),
    previewSteps: must("preview-steps"),
    previewButton: must("preview-button"),
    banner: must("error-banner"),
    toast: must("toast"),
    canvas: must("canvas"),
  });
  void app.start();
}
