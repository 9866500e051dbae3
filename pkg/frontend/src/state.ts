/** UI state and its pure update rules. */

export type Tool = "smart" | "brush" | "polygon" | "eraser";

export interface UiState {
  activeTool: Tool;
  activeClass: number; // 1..K
  nClasses: number;
  brushRadius: number;
  scaleIndex: number; // managed modulo 3
  overlayOpacity: number; // [0, 1]
  showUncertainty: boolean;
  sliceIndex: number;
}

export const BRUSH_RADIUS_MIN = 0;
export const BRUSH_RADIUS_MAX = 50;
export const MAX_CLASSES = 255;

/** Six visually distinct base colors; further classes get generated hues. */
export const CLASS_PALETTE: [number, number, number][] = [
  [230, 57, 70],
  [46, 196, 182],
  [255, 183, 3],
  [76, 114, 176],
  [155, 93, 229],
  [128, 237, 153],
];

export function classColor(classId: number): [number, number, number] {
  if (classId >= 1 && classId <= CLASS_PALETTE.length) {
    return CLASS_PALETTE[classId - 1];
  }
  // deterministic fallback hue walk for classes 7..255
  const hue = ((classId - 1) * 137.508) % 360;
  return hslToRgb(hue, 0.65, 0.55);
}

function hslToRgb(h: number, s: number, l: number): [number, number, number] {
  const c = (1 - Math.abs(2 * l - 1)) * s;
  const x = c * (1 - Math.abs(((h / 60) % 2) - 1));
  const m = l - c / 2;
  let rgb: [number, number, number];
  if (h < 60) rgb = [c, x, 0];
  else if (h < 120) rgb = [x, c, 0];
  else if (h < 180) rgb = [0, c, x];
  else if (h < 240) rgb = [0, x, c];
  else if (h < 300) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  return [
    Math.round((rgb[0] + m) * 255),
    Math.round((rgb[1] + m) * 255),
    Math.round((rgb[2] + m) * 255),
  ];
}

export function initialState(): UiState {
  return {
    activeTool: "smart",
    activeClass: 1,
    nClasses: 2,
    brushRadius: 6,
    scaleIndex: 0,
    overlayOpacity: 0.6,
    showUncertainty: false,
    sliceIndex: 0,
  };
}

/** Right click: next length scale, cycling through the three. */
export function cycleScale(state: UiState): UiState {
  return { ...state, scaleIndex: (state.scaleIndex + 1) % 3 };
}

export function setBrushRadius(state: UiState, radius: number): UiState {
  const clamped = Math.min(BRUSH_RADIUS_MAX, Math.max(BRUSH_RADIUS_MIN, Math.round(radius)));
  return { ...state, brushRadius: clamped };
}

export function setOpacity(state: UiState, opacity: number): UiState {
  return { ...state, overlayOpacity: Math.min(1, Math.max(0, opacity)) };
}

export function setTool(state: UiState, tool: Tool): UiState {
  return { ...state, activeTool: tool };
}

export function setActiveClass(state: UiState, classId: number): UiState {
  if (classId < 1 || classId > state.nClasses) return state;
  return { ...state, activeClass: classId };
}

export function addClass(state: UiState): UiState {
  if (state.nClasses >= MAX_CLASSES) return state;
  const n = state.nClasses + 1;
  return { ...state, nClasses: n, activeClass: n };
}

/** Client-side guard: a polygon needs at least 3 vertices to close. */
export function canClosePolygon(vertices: [number, number][]): boolean {
  return vertices.length >= 3;
}
