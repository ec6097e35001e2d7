/** 3D scatter of embedded records.
 *
 * Rendering decimates above MAX_RENDERED points (level-of-detail stride),
 * but picking always tests the full point set so selection precision does
 * not degrade. All geometry math is renderer-independent and unit-tested;
 * mount() is the only place that touches WebGL.
 */

import * as THREE from "three";

import { colorFor, hexToRgb01 } from "./colors.js";

export const MAX_RENDERED = 50_000;
const POINT_SIZE = 0.02;
const PICK_THRESHOLD = 0.015;

export interface ScatterCallbacks {
  onPick?: (index: number | null) => void;
  onHover?: (index: number | null) => void;
}

/** Center coordinates and scale them into the unit cube. */
export function normalizeCoords(coords: [number, number, number][]): Float32Array {
  const n = coords.length;
  const out = new Float32Array(n * 3);
  if (n === 0) return out;
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (const p of coords) {
    for (let c = 0; c < 3; c++) {
      if (p[c] < lo[c]) lo[c] = p[c];
      if (p[c] > hi[c]) hi[c] = p[c];
    }
  }
  const span = Math.max(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]) || 1;
  for (let i = 0; i < n; i++) {
    for (let c = 0; c < 3; c++) {
      const mid = (lo[c] + hi[c]) / 2;
      out[i * 3 + c] = (coords[i][c] - mid) / span;
    }
  }
  return out;
}

/** Stride that keeps the rendered subset at or below the LOD budget. */
export function decimationStride(n: number, budget = MAX_RENDERED): number {
  return n <= budget ? 1 : Math.ceil(n / budget);
}

export function buildColorBuffer(labels: string[]): Float32Array {
  const seen = new Map<string, string>();
  const out = new Float32Array(labels.length * 3);
  for (let i = 0; i < labels.length; i++) {
    const [r, g, b] = hexToRgb01(colorFor(labels[i], seen));
    out[i * 3] = r;
    out[i * 3 + 1] = g;
    out[i * 3 + 2] = b;
  }
  return out;
}

export class ScatterView {
  readonly positions: Float32Array;
  private colors: Float32Array;
  private readonly stride: number;
  private pickPoints: THREE.Points;
  private renderedGeometry: THREE.BufferGeometry;
  private raycaster = new THREE.Raycaster();
  private highlight = new Set<number>();

  constructor(
    coords: [number, number, number][],
    labels: string[],
    private callbacks: ScatterCallbacks = {},
  ) {
    this.positions = normalizeCoords(coords);
    this.colors = buildColorBuffer(labels);
    this.stride = decimationStride(coords.length);

    const pickGeometry = new THREE.BufferGeometry();
    pickGeometry.setAttribute("position", new THREE.BufferAttribute(this.positions, 3));
    this.pickPoints = new THREE.Points(
      pickGeometry,
      new THREE.PointsMaterial({ size: POINT_SIZE }),
    );
    this.raycaster.params.Points = { threshold: PICK_THRESHOLD };

    this.renderedGeometry = this.buildRenderedGeometry();
  }

  get renderedCount(): number {
    return Math.ceil(this.positions.length / 3 / this.stride);
  }

  private buildRenderedGeometry(): THREE.BufferGeometry {
    const n = this.positions.length / 3;
    const m = this.renderedCount;
    const pos = new Float32Array(m * 3);
    const col = new Float32Array(m * 3);
    for (let i = 0, j = 0; i < n; i += this.stride, j++) {
      for (let c = 0; c < 3; c++) {
        pos[j * 3 + c] = this.positions[i * 3 + c];
        col[j * 3 + c] = this.colors[i * 3 + c];
      }
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(pos, 3));
    geometry.setAttribute("color", new THREE.BufferAttribute(col, 3));
    return geometry;
  }

  /** Recolor in place (tau slider, scheme switch); no geometry rebuild. */
  setLabels(labels: string[]): void {
    this.colors = buildColorBuffer(labels);
    const attr = this.renderedGeometry.getAttribute("color") as THREE.BufferAttribute;
    const n = this.positions.length / 3;
    for (let i = 0, j = 0; i < n; i += this.stride, j++) {
      attr.setXYZ(j, this.colors[i * 3], this.colors[i * 3 + 1], this.colors[i * 3 + 2]);
    }
    attr.needsUpdate = true;
  }

  setHighlight(indices: Iterable<number>): void {
    this.highlight = new Set(indices);
  }

  isHighlighted(index: number): boolean {
    return this.highlight.has(index);
  }

  /** Index of the point under normalized device coordinates, full precision. */
  pick(ndcX: number, ndcY: number, camera: THREE.Camera): number | null {
    this.raycaster.setFromCamera(new THREE.Vector2(ndcX, ndcY), camera);
    const hits = this.raycaster.intersectObject(this.pickPoints);
    return hits.length ? (hits[0].index ?? null) : null;
  }

  /** Attach to a container and start the render loop (browser only). */
  mount(container: HTMLElement): () => void {
    const width = container.clientWidth || 800;
    const height = container.clientHeight || 600;
    const renderer = new THREE.WebGLRenderer({ antialias: true });
    renderer.setSize(width, height);
    container.appendChild(renderer.domElement);

    const scene = new THREE.Scene();
    scene.background = new THREE.Color("#11151c");
    const camera = new THREE.PerspectiveCamera(60, width / height, 0.01, 100);
    camera.position.set(0.9, 0.9, 1.4);
    camera.lookAt(0, 0, 0);

    const material = new THREE.PointsMaterial({ size: POINT_SIZE, vertexColors: true });
    scene.add(new THREE.Points(this.renderedGeometry, material));

    renderer.domElement.addEventListener("click", (evt) => {
      const rect = renderer.domElement.getBoundingClientRect();
      const x = ((evt.clientX - rect.left) / rect.width) * 2 - 1;
      const y = -((evt.clientY - rect.top) / rect.height) * 2 + 1;
      this.callbacks.onPick?.(this.pick(x, y, camera));
    });

    let frame = 0;
    const animate = () => {
      frame = requestAnimationFrame(animate);
      const t = performance.now() / 4000;
      camera.position.set(1.6 * Math.sin(t), 0.9, 1.6 * Math.cos(t));
      camera.lookAt(0, 0, 0);
      renderer.render(scene, camera);
    };
    animate();
    return () => {
      cancelAnimationFrame(frame);
      renderer.dispose();
      container.removeChild(renderer.domElement);
    };
  }
}
