/** DOM glue: wires the API client and pure renderers to the page. */

import { ExplorerApi, type RuleRow } from './api.js'
import {
  initialState,
  jumpToBottom,
  nextPageOffset,
  rulesQueryOf,
  selectComparison,
  selectMeasure,
  selectTarget,
  toggleSameCategory,
  withSession,
  type ExplorerState,
} from './state.js'
import {
  renderDendrogramRoot,
  renderError,
  renderGroups,
  renderHeatmap,
  renderMeasureChooser,
  renderRuleTable,
  renderTargetChooser,
} from './render.js'

const baseUrl = (window as { RULEBENCH_API?: string }).RULEBENCH_API ?? 'http://127.0.0.1:8765'
const api = new ExplorerApi(baseUrl)

let state: ExplorerState = initialState()
let loadedRows: RuleRow[] = []
let totalRows = 0

const el = (id: string) => document.getElementById(id) as HTMLElement

function setState(next: ExplorerState, resetRows = true) {
  state = next
  if (resetRows) {
    loadedRows = []
    totalRows = 0
  }
  void refresh()
}

async function refreshCatalogs() {
  const [targets, measures, groups] = await Promise.all([
    api.targets(),
    api.measures(),
    api.groups(),
  ])
  ;(el('target') as HTMLSelectElement).innerHTML = renderTargetChooser(
    targets.targets,
    state.target,
  )
  ;(el('measure') as HTMLSelectElement).innerHTML = renderMeasureChooser(
    measures.measures,
    state.measure,
  )
  el('groups').innerHTML = renderGroups(groups.groups)
  el('mode').textContent = state.blinded
    ? 'blinded review: measures hidden behind labels'
    : 'expert mode: all measures visible'
  ;(el('reveal') as HTMLButtonElement).hidden = !state.blinded
}

async function refreshRules() {
  const query = rulesQueryOf(state)
  if (!query) {
    el('rules').innerHTML = '<p class="empty">Pick a target and a measure.</p>'
    return
  }
  try {
    const page = await api.rules(query)
    totalRows = page.total
    if (query.offset !== undefined && query.offset >= 0 && loadedRows.length === query.offset) {
      loadedRows = loadedRows.concat(page.items)
      el('rules').innerHTML = renderRuleTable(loadedRows, page.total, 0)
    } else {
      loadedRows = page.items
      el('rules').innerHTML = renderRuleTable(page.items, page.total, page.offset)
    }
  } catch (err) {
    el('rules').innerHTML = renderError(err instanceof Error ? err.message : String(err))
  }
}

async function refreshComparison() {
  if (state.blinded) {
    el('comparison').innerHTML =
      '<p class="empty">Comparison views open up after revealing measures.</p>'
    return
  }
  try {
    if (state.comparison.view === 'matrix') {
      el('comparison').innerHTML = renderHeatmap(await api.correlation(state.comparison.method))
    } else {
      el('comparison').innerHTML = renderDendrogramRoot(
        await api.dendrogram(state.comparison.method),
      )
    }
  } catch (err) {
    el('comparison').innerHTML = renderError(err instanceof Error ? err.message : String(err))
  }
}

async function refresh() {
  await refreshCatalogs()
  await refreshRules()
  await refreshComparison()
}

async function startSession(blinded: boolean) {
  const session = await api.createSession(blinded)
  setState(withSession(state, session.session_id, session.blinded))
}

function wire() {
  ;(el('target') as HTMLSelectElement).addEventListener('change', (event) => {
    setState(selectTarget(state, (event.target as HTMLSelectElement).value))
  })
  ;(el('measure') as HTMLSelectElement).addEventListener('change', (event) => {
    setState(selectMeasure(state, (event.target as HTMLSelectElement).value))
  })
  el('same-category').addEventListener('change', () => setState(toggleSameCategory(state)))
  el('blind').addEventListener('click', () => void startSession(true))
  el('reveal').addEventListener('click', () => void startSession(false))
  el('more').addEventListener('click', () => {
    if (loadedRows.length < totalRows) {
      setState(nextPageOffset(state, loadedRows.length), false)
    }
  })
  el('bottom').addEventListener('click', () => setState(jumpToBottom(state)))
  ;(el('method') as HTMLSelectElement).addEventListener('change', (event) => {
    const method = (event.target as HTMLSelectElement).value
    setState(selectComparison(state, state.comparison.view, method), false)
  })
  for (const view of ['matrix', 'dendrogram'] as const) {
    el(`view-${view}`).addEventListener('click', () =>
      setState(selectComparison(state, view, state.comparison.method), false),
    )
  }
  // infinite scroll to the next page while ranked rows remain
  el('rules').addEventListener('scroll', () => {
    const box = el('rules')
    const nearBottom = box.scrollTop + box.clientHeight >= box.scrollHeight - 4
    if (nearBottom && loadedRows.length < totalRows && state.offset >= 0) {
      setState(nextPageOffset(state, loadedRows.length), false)
    }
  })
}

wire()
void startSession(false)
