/**
 * Pure renderers: server payloads in, HTML strings out.
 *
 * Every number shown is lifted verbatim from a payload field, so the view is
 * auditable against the API and the renderers are testable without a DOM.
 */

import type { CorrelationMatrix, DendrogramNode, GroupInfo, RuleRow } from './api.js'

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

const fmt = (value: number) => value.toFixed(3)

export function renderRuleTable(rows: RuleRow[], total: number, offset: number): string {
  if (rows.length === 0) {
    return '<p class="empty">No rules for this selection.</p>'
  }
  const body = rows
    .map((row, i) => {
      const antecedent = row.antecedent.map(escapeHtml).join(' + ')
      return (
        `<tr><td class="rank">${offset + i + 1}</td>` +
        `<td>${antecedent} &rarr; <strong>${escapeHtml(row.consequent)}</strong></td>` +
        `<td class="num">${row.support}</td>` +
        `<td class="num">${fmt(row.confidence)}</td>` +
        `<td class="num">${fmt(row.recall)}</td></tr>`
      )
    })
    .join('')
  return (
    `<table class="rules"><thead><tr><th>#</th><th>rule</th>` +
    `<th>support</th><th>confidence</th><th>recall</th></tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<p class="count">${rows.length} of ${total} rules (from rank ${offset + 1})</p>`
  )
}

export function renderMeasureChooser(measures: string[], selected: string | null): string {
  const options = measures
    .map((name) => {
      const sel = name === selected ? ' selected' : ''
      return `<option value="${escapeHtml(name)}"${sel}>${escapeHtml(name)}</option>`
    })
    .join('')
  return `<option value="">choose a measure</option>${options}`
}

export function renderTargetChooser(targets: string[], selected: string | null): string {
  const options = targets
    .map((name) => {
      const sel = name === selected ? ' selected' : ''
      return `<option value="${escapeHtml(name)}"${sel}>${escapeHtml(name)}</option>`
    })
    .join('')
  return `<option value="">choose a target</option>${options}`
}

export function renderGroups(groups: GroupInfo[]): string {
  const items = groups
    .map((group) => {
      const members = group.members ? `: ${group.members.map(escapeHtml).join(', ')}` : ''
      const rep = group.representative
        ? ` <em>(representative: ${escapeHtml(group.representative)})</em>`
        : ''
      return `<li><strong>${escapeHtml(group.label)}</strong>${members}${rep}</li>`
    })
    .join('')
  return `<ul class="groups">${items}</ul>`
}

/** Heatmap as a table; cell title carries the exact payload value. */
export function renderHeatmap(matrix: CorrelationMatrix): string {
  const names = matrix.measures
  const header = names.map((name) => `<th title="${escapeHtml(name)}"></th>`).join('')
  const rows = names
    .map((name, i) => {
      const cells = (matrix.values[i] ?? [])
        .map((value, j) => {
          const hue = value >= 0 ? 210 : 10
          const alpha = Math.min(1, Math.abs(value)).toFixed(3)
          return (
            `<td class="cell" title="${escapeHtml(name)} vs ${escapeHtml(names[j] ?? '')}: ${value}"` +
            ` style="background:hsla(${hue},70%,45%,${alpha})"></td>`
          )
        })
        .join('')
      return `<tr><th>${escapeHtml(name)}</th>${cells}</tr>`
    })
    .join('')
  return (
    `<p class="caption">${escapeHtml(matrix.method)} similarity, ${escapeHtml(matrix.aggregation)}</p>` +
    `<table class="heatmap"><tr><th></th>${header}</tr>${rows}</table>`
  )
}

export function renderDendrogram(node: DendrogramNode): string {
  if (node.name !== undefined) {
    return `<li class="leaf">${escapeHtml(node.name)}</li>`
  }
  const sim = node.similarity ?? 0
  return (
    `<li><span class="merge" title="${sim}">${sim.toFixed(3)}</span><ul>` +
    `${node.left ? renderDendrogram(node.left) : ''}` +
    `${node.right ? renderDendrogram(node.right) : ''}</ul></li>`
  )
}

export function renderDendrogramRoot(node: DendrogramNode): string {
  return `<ul class="dendrogram">${renderDendrogram(node)}</ul>`
}

export function countLeaves(node: DendrogramNode): number {
  if (node.name !== undefined) return 1
  return (node.left ? countLeaves(node.left) : 0) + (node.right ? countLeaves(node.right) : 0)
}

export function renderError(message: string): string {
  return `<p class="error">${escapeHtml(message)} <button data-action="retry">retry</button></p>`
}
