// Chat window: transcript, input box, attachment rendering.
//
// One request is in flight per session at any time; further sends queue up in
// order. The transcript survives page reloads through localStorage.

import { renderHeatmap, renderHistogram, renderScatter } from './charts'
import { fmtConfidence, ruleCardTitle } from './format'
import { ServiceError } from './api'
import type {
  Attachment,
  ChatMessageModel,
  HeatmapData,
  HistogramData,
  MessageResponse,
  RuleCard,
  ScatterData,
} from './types'

export interface ChatTransport {
  message(text: string): Promise<MessageResponse>
}

const STORAGE_KEY = 'fuzzykb.transcript'

export function renderAttachment(attachment: Attachment): HTMLElement {
  if (attachment.type === 'chart-series') {
    const wrap = document.createElement('figure')
    wrap.className = 'attachment chart-attachment'
    const data = attachment.data as unknown
    if (attachment.chart === 'histogram') {
      wrap.appendChild(renderHistogram(data as HistogramData))
    } else if (attachment.chart === 'scatter') {
      wrap.appendChild(renderScatter(data as ScatterData))
    } else {
      wrap.appendChild(renderHeatmap(data as HeatmapData))
    }
    const caption = document.createElement('figcaption')
    caption.textContent = attachment.title
    wrap.appendChild(caption)
    return wrap
  }
  if (attachment.type === 'table') {
    const wrap = document.createElement('div')
    wrap.className = 'attachment table-attachment'
    const table = document.createElement('table')
    const head = table.createTHead().insertRow()
    head.insertCell().textContent = attachment.title
    for (const column of attachment.columns) {
      head.insertCell().textContent = column
    }
    const body = table.createTBody()
    attachment.rows.forEach((row, i) => {
      const tr = body.insertRow()
      tr.insertCell().textContent = attachment.columns[i] ?? String(i)
      for (const value of row) tr.insertCell().textContent = String(value)
    })
    wrap.appendChild(table)
    return wrap
  }
  return renderRuleCards(attachment.rules)
}

export function renderRuleCards(rules: RuleCard[]): HTMLElement {
  const wrap = document.createElement('div')
  wrap.className = 'attachment rule-cards'
  for (const rule of rules) {
    const card = document.createElement('article')
    card.className = 'rule-card'
    const title = document.createElement('strong')
    title.textContent = ruleCardTitle(rule)
    const sentence = document.createElement('p')
    sentence.textContent = rule.sentence
    const confidences = document.createElement('small')
    confidences.textContent = 'term certainties: ' + rule.antecedent
      .map((a) => `${a.term} ${fmtConfidence(a.confidence)}`)
      .join(', ')
    card.append(title, sentence, confidences)
    wrap.appendChild(card)
  }
  return wrap
}

export function renderMessage(model: ChatMessageModel): HTMLElement {
  const row = document.createElement('article')
  row.className = `chat-msg ${model.author}`
  const author = document.createElement('strong')
  author.textContent = model.author === 'bot' ? 'assistant' : model.author
  const text = document.createElement('p')
  text.textContent = model.text
  row.append(author, text)
  for (const attachment of model.attachments) {
    row.appendChild(renderAttachment(attachment))
  }
  return row
}

export class ChatWindow {
  readonly root: HTMLElement
  private readonly transcriptEl: HTMLElement
  private readonly input: HTMLInputElement
  private readonly sendButton: HTMLButtonElement
  private transcript: ChatMessageModel[] = []
  private queue: string[] = []
  private busy = false

  constructor(
    private transport: ChatTransport,
    private storage: Storage | null = null,
  ) {
    this.root = document.createElement('section')
    this.root.className = 'chat-window'
    this.transcriptEl = document.createElement('div')
    this.transcriptEl.className = 'transcript'
    const form = document.createElement('form')
    this.input = document.createElement('input')
    this.input.placeholder = 'Ask me about the data...'
    this.sendButton = document.createElement('button')
    this.sendButton.type = 'submit'
    this.sendButton.textContent = 'Send'
    form.append(this.input, this.sendButton)
    form.addEventListener('submit', (event) => {
      event.preventDefault()
      const text = this.input.value.trim()
      if (text) {
        this.input.value = ''
        void this.send(text)
      }
    })
    this.root.append(this.transcriptEl, form)
    this.restore()
  }

  get messages(): readonly ChatMessageModel[] {
    return this.transcript
  }

  async send(text: string): Promise<void> {
    this.queue.push(text)
    if (this.busy) return
    this.busy = true
    try {
      while (this.queue.length > 0) {
        const next = this.queue.shift() as string
        await this.deliver(next)
      }
    } finally {
      this.busy = false
    }
  }

  private async deliver(text: string): Promise<void> {
    this.append({ author: 'user', text, attachments: [] })
    try {
      const response = await this.transport.message(text)
      this.append({
        author: 'bot',
        text: response.reply_text,
        attachments: response.attachments,
      })
    } catch (error) {
      if (error instanceof ServiceError) {
        // conflict and validation answers read as guidance, not failures
        this.append({ author: 'bot', text: error.message, attachments: [] })
      } else {
        this.appendRetry(text)
      }
    }
  }

  private append(model: ChatMessageModel): void {
    this.transcript.push(model)
    this.transcriptEl.appendChild(renderMessage(model))
    this.transcriptEl.scrollTop = this.transcriptEl.scrollHeight
    this.persist()
  }

  private appendRetry(text: string): void {
    const model: ChatMessageModel = {
      author: 'system',
      text: 'I could not reach the service.',
      attachments: [],
    }
    this.transcript.push(model)
    const row = renderMessage(model)
    const retry = document.createElement('button')
    retry.textContent = 'Retry'
    retry.className = 'retry'
    retry.addEventListener('click', () => {
      row.remove()
      this.transcript = this.transcript.filter((m) => m !== model)
      void this.send(text)
    })
    row.appendChild(retry)
    this.transcriptEl.appendChild(row)
    this.persist()
  }

  private persist(): void {
    this.storage?.setItem(STORAGE_KEY, JSON.stringify(this.transcript))
  }

  private restore(): void {
    const raw = this.storage?.getItem(STORAGE_KEY)
    if (!raw) return
    try {
      const stored = JSON.parse(raw) as ChatMessageModel[]
      for (const model of stored) {
        this.transcript.push(model)
        this.transcriptEl.appendChild(renderMessage(model))
      }
    } catch {
      this.storage?.removeItem(STORAGE_KEY)
    }
  }
}
