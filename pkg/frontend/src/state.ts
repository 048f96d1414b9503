/**
 * Explorer state and its pure transitions.
 *
 * The UI is a function of server responses plus this state; no score or
 * ranking logic lives client-side. Every transition returns a fresh state so
 * rendering stays predictable.
 */

export type ComparisonView = 'matrix' | 'dendrogram'

export interface ExplorerState {
  sessionId: string | null
  blinded: boolean
  target: string | null
  measure: string | null
  sameCategory: boolean
  pageSize: number
  /** offset of the next page to request; negative addresses the list tail */
  offset: number
  comparison: { view: ComparisonView; method: string }
}

export function initialState(pageSize = 25): ExplorerState {
  return {
    sessionId: null,
    blinded: false,
    target: null,
    measure: null,
    sameCategory: false,
    pageSize,
    offset: 0,
    comparison: { view: 'matrix', method: 'ndcc' },
  }
}

export function withSession(state: ExplorerState, sessionId: string, blinded: boolean): ExplorerState {
  // measure labels are session-specific, so a new session resets the choice
  return { ...state, sessionId, blinded, measure: null, offset: 0 }
}

export function selectTarget(state: ExplorerState, target: string): ExplorerState {
  return { ...state, target, offset: 0 }
}

export function selectMeasure(state: ExplorerState, measure: string): ExplorerState {
  return { ...state, measure, offset: 0 }
}

export function toggleSameCategory(state: ExplorerState): ExplorerState {
  return { ...state, sameCategory: !state.sameCategory, offset: 0 }
}

export function nextPageOffset(state: ExplorerState, loadedRows: number): ExplorerState {
  return { ...state, offset: loadedRows }
}

/** Jump straight to the bottom of the ranking via a negative offset. */
export function jumpToBottom(state: ExplorerState): ExplorerState {
  return { ...state, offset: -state.pageSize }
}

export function selectComparison(
  state: ExplorerState,
  view: ComparisonView,
  method: string,
): ExplorerState {
  return { ...state, comparison: { view, method } }
}

export function rulesQueryOf(state: ExplorerState) {
  if (!state.target || !state.measure) return null
  return {
    target: state.target,
    measure: state.measure,
    sameCategory: state.sameCategory,
    limit: state.pageSize,
    offset: state.offset,
  }
}
