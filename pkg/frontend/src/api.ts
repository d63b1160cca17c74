// Typed fetch client for the explanation service.

import type {
  MessageResponse,
  QueryRequest,
  QueryResultPayload,
  SchemaPayload,
} from './types'

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(detail)
  }

  get isConflict(): boolean {
    return this.status === 409
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText
    try {
      const body = await response.json()
      if (body && typeof body.detail === 'string') detail = body.detail
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ServiceError(response.status, detail)
  }
  return response.json() as Promise<T>
}

export class ServiceClient {
  constructor(public baseUrl: string, public sessionId: string | null = null) {}

  private url(path: string): string {
    return `${this.baseUrl}/sessions/${this.sessionId}${path}`
  }

  async createSession(): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions`, { method: 'POST' })
    const body = await asJson<{ session_id: string }>(response)
    this.sessionId = body.session_id
    return body.session_id
  }

  async message(text: string): Promise<MessageResponse> {
    const response = await fetch(this.url('/message'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ text }),
    })
    return asJson<MessageResponse>(response)
  }

  async schema(): Promise<SchemaPayload> {
    return asJson<SchemaPayload>(await fetch(this.url('/schema')))
  }

  async query(
    kind: 'whatif' | 'counterfactual', body: QueryRequest,
  ): Promise<QueryResultPayload> {
    const response = await fetch(this.url(`/query/${kind}`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    })
    return asJson<QueryResultPayload>(response)
  }
}
