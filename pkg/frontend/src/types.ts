// Payload shapes of the explanation service's HTTP API.

export interface RuleCard {
  id: number
  sentence: string
  antecedent: { term: string; confidence: number }[]
  class: string
  class_confidence: number
  rule_confidence: number
}

export interface ChartSeriesAttachment {
  type: 'chart-series'
  chart: 'histogram' | 'scatter' | 'heatmap'
  title: string
  data: Record<string, unknown>
}

export interface TableAttachment {
  type: 'table'
  title: string
  columns: string[]
  rows: number[][]
}

export interface KbExcerptAttachment {
  type: 'kb-excerpt'
  rules: RuleCard[]
}

export type Attachment =
  | ChartSeriesAttachment
  | TableAttachment
  | KbExcerptAttachment

export interface MessageResponse {
  reply_text: string
  attachments: Attachment[]
  intent: string | null
  entities: Record<string, string[]>
}

export interface SolutionPayload {
  rule_id: number
  bindings: Record<string, { term: string; confidence: number }>
  rule_confidence: number
}

export interface QueryResultPayload {
  solutions: SolutionPayload[]
  relaxed_known: boolean
  nearest_candidate: [number, number] | null
}

export interface SchemaFeature {
  name: string
  terms: string[]
}

export interface SchemaPayload {
  dataset: string | null
  features: SchemaFeature[]
  classes: string[]
  class_feature: string | null
  stage: { loaded: boolean; trained: boolean; built: boolean }
}

export interface QueryRequest {
  desired_class: string
  unknowns: string[]
  known: Record<string, string>
  contrast_class?: string
  limit?: number | null
}

export interface HistogramData {
  feature: string
  edges: number[]
  counts: number[]
}

export interface ScatterData {
  feature_x: string
  feature_y: string
  x: number[]
  y: number[]
  r: number
  p: number
}

export interface HeatmapData {
  features: string[]
  matrix: number[][]
}

export interface ChatMessageModel {
  author: 'user' | 'bot' | 'system'
  text: string
  attachments: Attachment[]
}
