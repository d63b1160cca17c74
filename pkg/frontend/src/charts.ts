// Canvas chart rendering from the service's JSON series. Geometry is computed
// by pure functions so it stays testable without a real 2D context.

import type { HeatmapData, HistogramData, ScatterData } from './types'

export interface Rect {
  x: number
  y: number
  w: number
  h: number
}

export interface Cell extends Rect {
  value: number
}

export const MARGIN = 34

export function histogramBars(
  data: HistogramData, width: number, height: number,
): Rect[] {
  const n = data.counts.length
  if (n === 0) return []
  const max = Math.max(...data.counts, 1)
  const plotW = width - 2 * MARGIN
  const plotH = height - 2 * MARGIN
  const barW = plotW / n
  return data.counts.map((count, i) => {
    const h = (count / max) * plotH
    return {
      x: MARGIN + i * barW + 1,
      y: height - MARGIN - h,
      w: Math.max(barW - 2, 1),
      h,
    }
  })
}

export function scatterPoints(
  data: ScatterData, width: number, height: number,
): { x: number; y: number }[] {
  const xs = data.x
  const ys = data.y
  if (xs.length === 0) return []
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)]
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)]
  const sx = (v: number) =>
    MARGIN + (x1 > x0 ? (v - x0) / (x1 - x0) : 0.5) * (width - 2 * MARGIN)
  const sy = (v: number) =>
    height - MARGIN - (y1 > y0 ? (v - y0) / (y1 - y0) : 0.5) * (height - 2 * MARGIN)
  return xs.map((v, i) => ({ x: sx(v), y: sy(ys[i]) }))
}

export function heatmapCells(
  data: HeatmapData, width: number, height: number,
): Cell[] {
  const n = data.features.length
  if (n === 0) return []
  const plotW = width - 2 * MARGIN
  const plotH = height - 2 * MARGIN
  const cw = plotW / n
  const ch = plotH / n
  const cells: Cell[] = []
  for (let row = 0; row < n; row++) {
    for (let col = 0; col < n; col++) {
      cells.push({
        x: MARGIN + col * cw,
        y: MARGIN + row * ch,
        w: cw,
        h: ch,
        value: data.matrix[row][col],
      })
    }
  }
  return cells
}

// correlation in [-1, 1]: blue for negative, white at zero, red for positive
export function correlationColor(value: number): string {
  const v = Math.max(-1, Math.min(1, value))
  const intensity = Math.round(255 * (1 - Math.abs(v)))
  return v >= 0
    ? `rgb(255,${intensity},${intensity})`
    : `rgb(${intensity},${intensity},255)`
}

function makeCanvas(width: number, height: number): HTMLCanvasElement {
  const canvas = document.createElement('canvas')
  canvas.width = width
  canvas.height = height
  canvas.className = 'chart'
  return canvas
}

export function renderHistogram(
  data: HistogramData, width = 420, height = 240,
): HTMLCanvasElement {
  const canvas = makeCanvas(width, height)
  const ctx = canvas.getContext('2d')
  if (!ctx) return canvas
  ctx.fillStyle = '#4a7fb5'
  for (const bar of histogramBars(data, width, height)) {
    ctx.fillRect(bar.x, bar.y, bar.w, bar.h)
  }
  ctx.strokeStyle = '#333'
  ctx.strokeRect(MARGIN, MARGIN, width - 2 * MARGIN, height - 2 * MARGIN)
  ctx.fillStyle = '#333'
  ctx.font = '11px sans-serif'
  ctx.fillText(data.feature, MARGIN, 16)
  ctx.fillText(String(data.edges[0]), MARGIN, height - 12)
  const last = String(data.edges[data.edges.length - 1])
  ctx.fillText(last, width - MARGIN - ctx.measureText(last).width, height - 12)
  return canvas
}

export function renderScatter(
  data: ScatterData, width = 420, height = 280,
): HTMLCanvasElement {
  const canvas = makeCanvas(width, height)
  const ctx = canvas.getContext('2d')
  if (!ctx) return canvas
  ctx.strokeStyle = '#333'
  ctx.strokeRect(MARGIN, MARGIN, width - 2 * MARGIN, height - 2 * MARGIN)
  ctx.fillStyle = 'rgba(74,127,181,0.6)'
  for (const p of scatterPoints(data, width, height)) {
    ctx.beginPath()
    ctx.arc(p.x, p.y, 2.5, 0, Math.PI * 2)
    ctx.fill()
  }
  ctx.fillStyle = '#333'
  ctx.font = '11px sans-serif'
  ctx.fillText(`${data.feature_x} vs ${data.feature_y}`, MARGIN, 16)
  return canvas
}

export function renderHeatmap(
  data: HeatmapData, width = 420, height = 420,
): HTMLCanvasElement {
  const canvas = makeCanvas(width, height)
  const ctx = canvas.getContext('2d')
  if (!ctx) return canvas
  const cells = heatmapCells(data, width, height)
  for (const cell of cells) {
    ctx.fillStyle = correlationColor(cell.value)
    ctx.fillRect(cell.x, cell.y, cell.w, cell.h)
  }
  ctx.fillStyle = '#333'
  ctx.font = '9px sans-serif'
  const n = data.features.length
  const cw = (width - 2 * MARGIN) / n
  data.features.forEach((name, i) => {
    ctx.fillText(name.slice(0, 6), MARGIN + i * cw + 2, MARGIN - 4)
    ctx.fillText(name.slice(0, 6), 2, MARGIN + i * cw + 12)
  })
  return canvas
}
