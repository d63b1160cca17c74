// Structured query builder: a form-based alternative to free text that emits
// exactly the same query JSON as the natural-language path.

import { describeQueryResult } from './format'
import type {
  QueryRequest,
  QueryResultPayload,
  SchemaPayload,
} from './types'

export type FeatureRole = 'unused' | 'known' | 'unknown'

export interface PanelState {
  kind: 'whatif' | 'counterfactual'
  desiredClass: string
  contrastClass: string | null
  roles: Record<string, FeatureRole>
  knownTerms: Record<string, string>
}

export interface PanelValidation {
  ok: boolean
  problems: string[]
}

export function validatePanel(state: PanelState): PanelValidation {
  const problems: string[] = []
  const unknowns = Object.entries(state.roles)
    .filter(([, role]) => role === 'unknown')
  if (unknowns.length === 0) {
    problems.push('select at least one feature to solve for')
  }
  for (const [feature, role] of Object.entries(state.roles)) {
    if (role === 'known' && !state.knownTerms[feature]) {
      problems.push(`pick a value for ${feature}`)
    }
  }
  if (!state.desiredClass) {
    problems.push('pick a desired outcome')
  }
  if (state.kind === 'counterfactual') {
    if (!state.contrastClass) {
      problems.push('pick the outcome to move away from')
    } else if (state.contrastClass === state.desiredClass) {
      problems.push('the two outcomes must differ')
    }
  }
  return { ok: problems.length === 0, problems }
}

export function buildQueryRequest(state: PanelState): QueryRequest {
  const unknowns = Object.entries(state.roles)
    .filter(([, role]) => role === 'unknown')
    .map(([feature]) => feature)
  const known: Record<string, string> = {}
  for (const [feature, role] of Object.entries(state.roles)) {
    if (role === 'known') known[feature] = state.knownTerms[feature]
  }
  const request: QueryRequest = {
    desired_class: state.desiredClass,
    unknowns,
    known,
  }
  if (state.kind === 'counterfactual' && state.contrastClass) {
    request.contrast_class = state.contrastClass
  }
  return request
}

export type PanelSubmit = (
  kind: 'whatif' | 'counterfactual',
  request: QueryRequest,
) => Promise<QueryResultPayload>

export class QueryBuilderPanel {
  readonly root: HTMLElement
  readonly state: PanelState
  private readonly submitButton: HTMLButtonElement
  private readonly problemsEl: HTMLElement
  private readonly resultEl: HTMLElement

  constructor(schema: SchemaPayload, private onSubmit: PanelSubmit) {
    this.state = {
      kind: 'whatif',
      desiredClass: schema.classes[0] ?? '',
      contrastClass: null,
      roles: Object.fromEntries(schema.features.map((f) => [f.name, 'unused'])),
      knownTerms: {},
    }

    this.root = document.createElement('section')
    this.root.className = 'query-panel'
    const heading = document.createElement('h2')
    heading.textContent = 'Query builder'
    this.root.appendChild(heading)

    const kindSelect = this.select(['whatif', 'counterfactual'], (value) => {
      this.state.kind = value as PanelState['kind']
      this.refresh()
    })
    this.labelled('Question type', kindSelect)

    const desired = this.select(schema.classes, (value) => {
      this.state.desiredClass = value
      this.refresh()
    })
    this.labelled('Desired outcome', desired)

    const contrast = this.select(['', ...schema.classes], (value) => {
      this.state.contrastClass = value || null
      this.refresh()
    })
    contrast.dataset.role = 'contrast'
    this.labelled('Instead of', contrast)

    for (const feature of schema.features) {
      const row = document.createElement('div')
      row.className = 'feature-row'
      const name = document.createElement('span')
      name.textContent = feature.name
      const role = this.select(['unused', 'known', 'unknown'], (value) => {
        this.state.roles[feature.name] = value as FeatureRole
        termSelect.disabled = value !== 'known'
        this.refresh()
      })
      role.dataset.feature = feature.name
      // exactly the feature's own vocabulary, nothing else
      const termSelect = this.select(['', ...feature.terms], (value) => {
        this.state.knownTerms[feature.name] = value
        this.refresh()
      })
      termSelect.dataset.termsFor = feature.name
      termSelect.disabled = true
      row.append(name, role, termSelect)
      this.root.appendChild(row)
    }

    this.problemsEl = document.createElement('ul')
    this.problemsEl.className = 'problems'
    this.submitButton = document.createElement('button')
    this.submitButton.textContent = 'Run query'
    this.submitButton.addEventListener('click', () => void this.run())
    this.resultEl = document.createElement('pre')
    this.resultEl.className = 'panel-result'
    this.root.append(this.problemsEl, this.submitButton, this.resultEl)
    this.refresh()
  }

  refresh(): void {
    const validation = validatePanel(this.state)
    this.submitButton.disabled = !validation.ok
    this.problemsEl.textContent = ''
    for (const problem of validation.problems) {
      const li = document.createElement('li')
      li.textContent = problem
      this.problemsEl.appendChild(li)
    }
  }

  async run(): Promise<void> {
    const validation = validatePanel(this.state)
    if (!validation.ok) return
    try {
      const result = await this.onSubmit(
        this.state.kind, buildQueryRequest(this.state))
      this.resultEl.textContent = describeQueryResult(result).join('\n')
    } catch (error) {
      this.resultEl.textContent =
        error instanceof Error ? error.message : String(error)
    }
  }

  private select(
    options: string[], onChange: (value: string) => void,
  ): HTMLSelectElement {
    const el = document.createElement('select')
    for (const option of options) {
      const opt = document.createElement('option')
      opt.value = option
      opt.textContent = option || '(none)'
      el.appendChild(opt)
    }
    el.addEventListener('change', () => onChange(el.value))
    return el
  }

  private labelled(text: string, control: HTMLElement): void {
    const label = document.createElement('label')
    const span = document.createElement('span')
    span.textContent = text
    label.append(span, control)
    this.root.appendChild(label)
  }
}
