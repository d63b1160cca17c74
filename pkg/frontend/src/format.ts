// Presentation helpers. Every confidence shown in the UI comes from a service
// payload and is only ever *formatted* here, never recomputed.

import type { QueryResultPayload, RuleCard, SolutionPayload } from './types'

export function fmtConfidence(value: number): string {
  return value.toFixed(3)
}

export function displayTerm(term: string): string {
  return term.replace(/_/g, ' ')
}

export function ruleCardTitle(rule: RuleCard): string {
  return `Rule #${rule.id} -> ${rule.class} ` +
    `(rule certainty ${fmtConfidence(rule.rule_confidence)})`
}

export function solutionLines(solution: SolutionPayload): string[] {
  const lines = Object.entries(solution.bindings).map(
    ([feature, binding]) =>
      `${feature} = ${displayTerm(binding.term)} ` +
      `(certainty ${fmtConfidence(binding.confidence)})`,
  )
  lines.push(`rule #${solution.rule_id}, ` +
    `certainty ${fmtConfidence(solution.rule_confidence)}`)
  return lines
}

export function describeQueryResult(result: QueryResultPayload): string[] {
  if (result.solutions.length === 0) {
    const lines = ['No rule matches this query.']
    if (result.nearest_candidate) {
      const [id, mismatches] = result.nearest_candidate
      lines.push(`Closest candidate: rule #${id} ` +
        `(${mismatches} known value(s) differ).`)
    }
    return lines
  }
  return result.solutions.flatMap((s, i) =>
    [`Solution ${i + 1}:`, ...solutionLines(s).map((l) => `  ${l}`)])
}
