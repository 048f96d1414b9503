import { describe, expect, it } from 'vitest'

import {
  countLeaves,
  renderDendrogramRoot,
  renderHeatmap,
  renderMeasureChooser,
  renderRuleTable,
} from '../src/render'
import type { DendrogramNode, RuleRow } from '../src/api'

const rows: RuleRow[] = [
  { antecedent: ['milk', 'bread'], consequent: 'butter', support: 42, confidence: 0.8125, recall: 0.25 },
  { antecedent: ['<b>evil</b>'], consequent: 'x', support: 7, confidence: 0.5, recall: 0.125 },
]

describe('rule table', () => {
  it('renders one row per rule with the display triple', () => {
    const html = renderRuleTable(rows, 12, 0)
    expect(html.match(/<tr>/g)?.length).toBe(3) // header + 2 rows
    expect(html).toContain('milk + bread')
    expect(html).toContain('butter')
    expect(html).toContain('42')
    expect(html).toContain('0.813')
    expect(html).toContain('0.250')
    expect(html).toContain('2 of 12 rules')
  })

  it('escapes labels', () => {
    const html = renderRuleTable(rows, 2, 0)
    expect(html).not.toContain('<b>evil</b>')
    expect(html).toContain('&lt;b&gt;evil&lt;/b&gt;')
  })

  it('numbers rows from the page offset', () => {
    const html = renderRuleTable(rows, 40, 38)
    expect(html).toContain('<td class="rank">39</td>')
    expect(html).toContain('<td class="rank">40</td>')
  })

  it('renders an empty state', () => {
    expect(renderRuleTable([], 0, 0)).toContain('No rules')
  })
})

describe('measure chooser', () => {
  it('renders exactly the given labels', () => {
    const html = renderMeasureChooser(['A', 'B', 'C', 'D', 'E', 'F'], 'B')
    expect(html.match(/<option value="[A-F]"/g)?.length).toBe(6)
    expect(html).toContain('<option value="B" selected>')
  })
})

describe('heatmap', () => {
  const matrix = {
    method: 'ndcc',
    aggregation: 'pooled',
    measures: ['m1', 'm2'],
    values: [
      [1, -0.25],
      [-0.25, 1],
    ],
  }

  it('binds every cell title to the exact payload value', () => {
    const html = renderHeatmap(matrix)
    expect(html).toContain('title="m1 vs m2: -0.25"')
    expect(html).toContain('title="m1 vs m1: 1"')
  })

  it('diagonal renders as 1', () => {
    expect(renderHeatmap(matrix)).toContain('m2 vs m2: 1')
  })
})

describe('dendrogram', () => {
  const tree: DendrogramNode = {
    similarity: 0.42,
    left: { name: 'alpha' },
    right: { similarity: 0.9, left: { name: 'beta' }, right: { name: 'gamma' } },
  }

  it('renders merge similarities and leaves', () => {
    const html = renderDendrogramRoot(tree)
    expect(html).toContain('0.420')
    expect(html).toContain('0.900')
    for (const leaf of ['alpha', 'beta', 'gamma']) expect(html).toContain(leaf)
  })

  it('leaf count matches the payload', () => {
    expect(countLeaves(tree)).toBe(3)
  })
})
