/** Typed client for the explorer JSON API. */

export interface SessionInfo {
  session_id: string
  blinded: boolean
}

export interface MeasureCatalog {
  measures: string[]
  blinded: boolean
}

export interface GroupInfo {
  label: string
  members?: string[]
  representative?: string
}

export interface RuleRow {
  antecedent: string[]
  consequent: string
  support: number
  confidence: number
  recall: number
}

export interface RulesPage {
  total: number
  offset: number
  items: RuleRow[]
}

export interface CorrelationMatrix {
  method: string
  aggregation: string
  measures: string[]
  values: number[][]
}

export interface DendrogramNode {
  name?: string
  similarity?: number
  left?: DendrogramNode
  right?: DendrogramNode
}

export interface RulesQuery {
  target: string
  measure: string
  sameCategory?: boolean
  limit?: number
  offset?: number
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message)
  }
}

/**
 * All reads go through `get`, which deduplicates concurrent in-flight
 * requests per endpoint+params+session so bursty UI events cost one fetch.
 */
export class ExplorerApi {
  private inflight = new Map<string, Promise<unknown>>()

  constructor(
    private readonly baseUrl: string,
    public sessionId: string | null = null,
  ) {}

  private headers(): Record<string, string> {
    return this.sessionId ? { 'X-Session-Id': this.sessionId } : {}
  }

  private async fetchJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path, { headers: this.headers() })
    const body = await response.json()
    if (!response.ok) {
      throw new ApiError(response.status, (body as { error?: string }).error ?? 'request failed')
    }
    return body as T
  }

  private get<T>(path: string): Promise<T> {
    const key = `${this.sessionId ?? ''}:${path}`
    const pending = this.inflight.get(key)
    if (pending) return pending as Promise<T>
    const request = this.fetchJson<T>(path).finally(() => this.inflight.delete(key))
    this.inflight.set(key, request)
    return request
  }

  async createSession(blinded: boolean): Promise<SessionInfo> {
    const response = await fetch(`${this.baseUrl}/session`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ blinded }),
    })
    const body = (await response.json()) as SessionInfo & { error?: string }
    if (!response.ok) throw new ApiError(response.status, body.error ?? 'session failed')
    this.sessionId = body.session_id
    return body
  }

  targets(): Promise<{ targets: string[] }> {
    return this.get('/targets')
  }

  measures(): Promise<MeasureCatalog> {
    return this.get('/measures')
  }

  groups(): Promise<{ groups: GroupInfo[]; blinded: boolean }> {
    return this.get('/groups')
  }

  rules(query: RulesQuery): Promise<RulesPage> {
    const params = new URLSearchParams({
      target: query.target,
      measure: query.measure,
    })
    if (query.sameCategory) params.set('same_category', 'true')
    if (query.limit !== undefined) params.set('limit', String(query.limit))
    if (query.offset !== undefined) params.set('offset', String(query.offset))
    return this.get(`/rules?${params.toString()}`)
  }

  correlation(method: string, aggregation?: string): Promise<CorrelationMatrix> {
    const params = new URLSearchParams({ method })
    if (aggregation) params.set('aggregation', aggregation)
    return this.get(`/correlation?${params.toString()}`)
  }

  dendrogram(method: string): Promise<DendrogramNode> {
    return this.get(`/dendrogram?method=${encodeURIComponent(method)}`)
  }
}
