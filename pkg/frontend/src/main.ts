/** Browser labelling app: upload, smart-label hover/confirm, draw tools,
 * train, overlays, downloads. All rasterization happens server-side; this
 * file only collects geometry and composites pixels for display. */

import { ApiClient, ApiError, PromptResponse, SessionInfo } from "./api.js";
import { HoverScheduler } from "./debounce.js";
import { compositeSegmentation, maskTint, uncertaintyHeat } from "./overlay.js";
import { decodeRle } from "./rle.js";
import {
  UiState,
  canClosePolygon,
  classColor,
  cycleScale,
  initialState,
  setActiveClass,
  setBrushRadius,
  setOpacity,
  setTool,
} from "./state.js";

const api = new ApiClient("");

interface AppContext {
  state: UiState;
  session: SessionInfo | null;
  ready: boolean;
  baseImage: Uint8ClampedArray | null; // RGBA of the current slice
  segClassMap: Uint8Array | null;
  uncertainty: Uint8Array | null;
  lastPrompt: PromptResponse | null;
  hoverPos: [number, number] | null;
  strokePath: [number, number][];
  polygonVertices: [number, number][];
  labelledCount: number;
  training: boolean;
}

const ctx: AppContext = {
  state: initialState(),
  session: null,
  ready: false,
  baseImage: null,
  segClassMap: null,
  uncertainty: null,
  lastPrompt: null,
  hoverPos: null,
  strokePath: [],
  polygonVertices: [],
  labelledCount: 0,
  training: false,
};

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

const imageCanvas = $("image-canvas") as HTMLCanvasElement;
const overlayCanvas = $("overlay-canvas") as HTMLCanvasElement;
const labelCanvas = $("label-canvas") as HTMLCanvasElement;
const previewCanvas = $("preview-canvas") as HTMLCanvasElement;
const statusBar = $("status-bar");
const trainButton = $("train-button") as HTMLButtonElement;

function setStatus(text: string): void {
  statusBar.textContent = text;
}

function canvas2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const c = canvas.getContext("2d");
  if (!c) throw new Error("no 2d context");
  return c;
}

function toImageData(data: Uint8ClampedArray, width: number, height: number): ImageData {
  // our buffers are always plain ArrayBuffer-backed
  return new ImageData(data as Uint8ClampedArray<ArrayBuffer>, width, height);
}

// ---------------------------------------------------------------- rendering

async function fetchGrayPng(url: string): Promise<Uint8Array> {
  const resp = await fetch(url);
  if (!resp.ok) throw new ApiError(resp.status, "HttpError", url);
  const blob = await resp.blob();
  const bitmap = await createImageBitmap(blob);
  const off = document.createElement("canvas");
  off.width = bitmap.width;
  off.height = bitmap.height;
  const c = canvas2d(off as HTMLCanvasElement);
  c.drawImage(bitmap, 0, 0);
  const rgba = c.getImageData(0, 0, bitmap.width, bitmap.height).data;
  const gray = new Uint8Array(bitmap.width * bitmap.height);
  for (let i = 0; i < gray.length; i++) gray[i] = rgba[i * 4]; // grayscale PNG: r==value
  return gray;
}

async function refreshBaseImage(): Promise<void> {
  if (!ctx.session) return;
  const resp = await fetch(api.imageUrl(ctx.session.session_id, ctx.state.sliceIndex));
  const bitmap = await createImageBitmap(await resp.blob());
  for (const canvas of [imageCanvas, overlayCanvas, labelCanvas, previewCanvas]) {
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
  }
  const c = canvas2d(imageCanvas);
  c.drawImage(bitmap, 0, 0);
  ctx.baseImage = c.getImageData(0, 0, bitmap.width, bitmap.height).data;
  renderOverlay();
}

async function refreshLabels(): Promise<void> {
  if (!ctx.session) return;
  const ids = await fetchGrayPng(api.labelsUrl(ctx.session.session_id, ctx.state.sliceIndex));
  const tinted = new Uint8ClampedArray(ids.length * 4);
  for (let i = 0; i < ids.length; i++) {
    if (ids[i] > 0) {
      const [r, g, b] = classColor(ids[i]);
      const j = i * 4;
      tinted[j] = r;
      tinted[j + 1] = g;
      tinted[j + 2] = b;
      tinted[j + 3] = 190;
    }
  }
  canvas2d(labelCanvas).putImageData(
    toImageData(tinted, labelCanvas.width, labelCanvas.height), 0, 0,
  );
}

async function refreshSegmentation(): Promise<void> {
  if (!ctx.session) return;
  try {
    ctx.segClassMap = await fetchGrayPng(
      api.segmentationUrl(ctx.session.session_id, ctx.state.sliceIndex),
    );
    ctx.uncertainty = await fetchGrayPng(
      api.uncertaintyUrl(ctx.session.session_id, ctx.state.sliceIndex),
    );
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) return; // not trained yet
    throw err;
  }
  renderOverlay();
}

function renderOverlay(): void {
  const c = canvas2d(overlayCanvas);
  c.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
  if (!ctx.baseImage) return;
  if (ctx.state.showUncertainty && ctx.uncertainty) {
    const heat = uncertaintyHeat(ctx.uncertainty);
    c.putImageData(toImageData(heat, overlayCanvas.width, overlayCanvas.height), 0, 0);
    return;
  }
  if (ctx.segClassMap) {
    const composited = compositeSegmentation(
      ctx.baseImage, ctx.segClassMap, ctx.state.overlayOpacity,
    );
    c.putImageData(toImageData(composited, overlayCanvas.width, overlayCanvas.height), 0, 0);
  }
}

function renderPreview(): void {
  const c = canvas2d(previewCanvas);
  c.clearRect(0, 0, previewCanvas.width, previewCanvas.height);
  if (ctx.state.activeTool === "smart" && ctx.lastPrompt) {
    const mask = decodeRle(ctx.lastPrompt.mask);
    const tint = maskTint(mask, classColor(ctx.state.activeClass));
    c.putImageData(toImageData(tint, previewCanvas.width, previewCanvas.height), 0, 0);
  } else if (ctx.state.activeTool === "polygon" && ctx.polygonVertices.length) {
    c.strokeStyle = "#ffffff";
    c.lineWidth = 1;
    c.beginPath();
    const [x0, y0] = ctx.polygonVertices[0];
    c.moveTo(x0, y0);
    for (const [x, y] of ctx.polygonVertices.slice(1)) c.lineTo(x, y);
    c.stroke();
  }
}

// -------------------------------------------------------------- smart label

const scheduler = new HoverScheduler<[number, number], PromptResponse>(
  ([x, y]) => {
    if (!ctx.session) return Promise.reject(new Error("no session"));
    return api.prompt(ctx.session.session_id, x, y, ctx.state.sliceIndex, ctx.state.scaleIndex);
  },
  (result) => {
    ctx.lastPrompt = result;
    renderPreview();
  },
  100,
  undefined,
  (err) => {
    if (err instanceof ApiError && err.status === 409) {
      setStatus("preparing smart labelling…");
    }
  },
);

async function acceptCurrentMask(): Promise<void> {
  if (!ctx.session || !ctx.lastPrompt) return;
  const resp = await api.postLabels(ctx.session.session_id, [
    {
      source: "smart_mask",
      mask: ctx.lastPrompt.mask,
      class_id: ctx.state.activeClass,
      slice: ctx.state.sliceIndex,
    },
  ]);
  ctx.labelledCount = resp.labelled_pixel_count;
  setStatus(`${ctx.labelledCount} labelled pixels`);
  await refreshLabels();
}

// -------------------------------------------------------------- draw tools

async function submitStroke(): Promise<void> {
  if (!ctx.session || ctx.strokePath.length === 0) return;
  const source = ctx.state.activeTool === "eraser" ? "eraser" : "brush";
  const record = {
    source,
    path: ctx.strokePath,
    radius: ctx.state.brushRadius,
    slice: ctx.state.sliceIndex,
  } as const;
  const resp = await api.postLabels(ctx.session.session_id, [
    source === "eraser" ? record : { ...record, class_id: ctx.state.activeClass },
  ]);
  ctx.strokePath = [];
  ctx.labelledCount = resp.labelled_pixel_count;
  setStatus(`${ctx.labelledCount} labelled pixels`);
  await refreshLabels();
}

async function closePolygon(): Promise<void> {
  if (!ctx.session) return;
  if (!canClosePolygon(ctx.polygonVertices)) {
    setStatus("polygon needs at least 3 vertices");
    ctx.polygonVertices = [];
    renderPreview();
    return;
  }
  const resp = await api.postLabels(ctx.session.session_id, [
    {
      source: "polygon",
      vertices: ctx.polygonVertices,
      class_id: ctx.state.activeClass,
      slice: ctx.state.sliceIndex,
    },
  ]);
  ctx.polygonVertices = [];
  ctx.labelledCount = resp.labelled_pixel_count;
  setStatus(`${ctx.labelledCount} labelled pixels`);
  renderPreview();
  await refreshLabels();
}

// ----------------------------------------------------------- pointer wiring

function canvasPos(ev: MouseEvent): [number, number] {
  const rect = previewCanvas.getBoundingClientRect();
  const x = Math.floor(((ev.clientX - rect.left) / rect.width) * previewCanvas.width);
  const y = Math.floor(((ev.clientY - rect.top) / rect.height) * previewCanvas.height);
  return [
    Math.max(0, Math.min(previewCanvas.width - 1, x)),
    Math.max(0, Math.min(previewCanvas.height - 1, y)),
  ];
}

let drawing = false;

previewCanvas.addEventListener("pointermove", (ev) => {
  if (!ctx.ready) return;
  const pos = canvasPos(ev);
  ctx.hoverPos = pos;
  if (ctx.state.activeTool === "smart") {
    scheduler.update(pos);
  } else if (drawing && (ctx.state.activeTool === "brush" || ctx.state.activeTool === "eraser")) {
    ctx.strokePath.push(pos);
  }
});

previewCanvas.addEventListener("pointerdown", (ev) => {
  if (!ctx.ready || ev.button !== 0) return;
  const pos = canvasPos(ev);
  switch (ctx.state.activeTool) {
    case "smart":
      void acceptCurrentMask();
      break;
    case "brush":
    case "eraser":
      drawing = true;
      ctx.strokePath = [pos];
      break;
    case "polygon":
      ctx.polygonVertices.push(pos);
      renderPreview();
      break;
  }
});

previewCanvas.addEventListener("pointerup", () => {
  if (drawing) {
    drawing = false;
    void submitStroke();
  }
});

previewCanvas.addEventListener("dblclick", () => {
  if (ctx.state.activeTool === "polygon") void closePolygon();
});

previewCanvas.addEventListener("contextmenu", (ev) => {
  ev.preventDefault(); // right click cycles the smart-label scale instead
  if (ctx.state.activeTool !== "smart" || !ctx.ready) return;
  ctx.state = cycleScale(ctx.state);
  if (ctx.hoverPos) scheduler.update(ctx.hoverPos);
});

// ------------------------------------------------------------------ toolbar

for (const tool of ["smart", "brush", "polygon", "eraser"] as const) {
  $(`tool-${tool}`).addEventListener("click", () => {
    ctx.state = setTool(ctx.state, tool);
    ctx.polygonVertices = [];
    ctx.lastPrompt = null;
    renderPreview();
    document.querySelectorAll(".tool").forEach((b) => b.classList.remove("active"));
    $(`tool-${tool}`).classList.add("active");
  });
}

const classSelect = $("class-select") as HTMLSelectElement;

function rebuildClassOptions(): void {
  classSelect.innerHTML = "";
  for (let cid = 1; cid <= ctx.state.nClasses; cid++) {
    const opt = document.createElement("option");
    opt.value = String(cid);
    opt.textContent = `class ${cid}`;
    const [r, g, b] = classColor(cid);
    opt.style.backgroundColor = `rgb(${r},${g},${b})`;
    classSelect.appendChild(opt);
  }
  classSelect.value = String(ctx.state.activeClass);
}

classSelect.addEventListener("change", () => {
  ctx.state = setActiveClass(ctx.state, Number(classSelect.value));
});

$("add-class").addEventListener("click", () => {
  ctx.state = { ...ctx.state, nClasses: Math.min(255, ctx.state.nClasses + 1) };
  ctx.state = setActiveClass(ctx.state, ctx.state.nClasses);
  rebuildClassOptions();
});

const radiusSlider = $("brush-radius") as HTMLInputElement;
radiusSlider.addEventListener("input", () => {
  ctx.state = setBrushRadius(ctx.state, Number(radiusSlider.value));
});

const opacitySlider = $("overlay-opacity") as HTMLInputElement;
opacitySlider.addEventListener("input", () => {
  ctx.state = setOpacity(ctx.state, Number(opacitySlider.value) / 100);
  renderOverlay();
});

($("show-uncertainty") as HTMLInputElement).addEventListener("change", (ev) => {
  ctx.state = { ...ctx.state, showUncertainty: (ev.target as HTMLInputElement).checked };
  renderOverlay(); // display-only: never re-requests training
});

// --------------------------------------------------------- session controls

($("file-input") as HTMLInputElement).addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  setStatus("uploading…");
  try {
    ctx.session = await api.createSession(file, file.type || "application/octet-stream");
  } catch (err) {
    setStatus(`upload failed: ${err}`);
    return;
  }
  ctx.ready = false;
  ctx.segClassMap = null;
  ctx.uncertainty = null;
  ctx.labelledCount = 0;
  ctx.state = { ...ctx.state, sliceIndex: 0 };
  updateSliceLabel();
  await refreshBaseImage();
  setStatus("computing embedding + features…");
  await api.waitReady(ctx.session.session_id);
  ctx.ready = true;
  setStatus("ready — hover to preview, left click to confirm, right click to change scale");
});

function updateSliceLabel(): void {
  const n = ctx.session?.n_slices ?? 0;
  $("slice-label").textContent = n ? `slice ${ctx.state.sliceIndex + 1}/${n}` : "";
}

$("slice-prev").addEventListener("click", () => void changeSlice(-1));
$("slice-next").addEventListener("click", () => void changeSlice(1));

async function changeSlice(delta: number): Promise<void> {
  if (!ctx.session) return;
  const n = ctx.session.n_slices;
  const next = Math.max(0, Math.min(n - 1, ctx.state.sliceIndex + delta));
  if (next === ctx.state.sliceIndex) return;
  ctx.state = { ...ctx.state, sliceIndex: next };
  ctx.lastPrompt = null;
  updateSliceLabel();
  await refreshBaseImage();
  await refreshLabels();
  await refreshSegmentation();
}

trainButton.addEventListener("click", async () => {
  if (!ctx.session || ctx.training || ctx.labelledCount === 0) return;
  ctx.training = true;
  trainButton.disabled = true;
  setStatus("training…");
  try {
    const resp = await api.train(ctx.session.session_id);
    setStatus(`trained — accuracy on labels ${(resp.train_accuracy * 100).toFixed(1)}%`);
    await refreshSegmentation();
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      setStatus("training already in progress");
    } else {
      setStatus(`training failed: ${err}`);
    }
  } finally {
    ctx.training = false;
    trainButton.disabled = false;
  }
});

function bindDownload(id: string, url: () => string | null): void {
  $(id).addEventListener("click", () => {
    const u = url();
    if (u) window.open(u, "_blank");
  });
}

bindDownload("download-labels", () =>
  ctx.session ? api.labelsUrl(ctx.session.session_id, ctx.state.sliceIndex) : null,
);
bindDownload("download-segmentation", () =>
  ctx.session ? api.segmentationUrl(ctx.session.session_id, ctx.state.sliceIndex) : null,
);
bindDownload("download-classifier", () =>
  ctx.session ? api.classifierUrl(ctx.session.session_id) : null,
);

($("classifier-input") as HTMLInputElement).addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file || !ctx.session) return;
  try {
    await api.uploadClassifier(ctx.session.session_id, file);
    setStatus("classifier applied");
    await refreshSegmentation();
  } catch (err) {
    setStatus(`classifier rejected: ${err}`);
  }
});

rebuildClassOptions();
setStatus("upload an image to begin");
