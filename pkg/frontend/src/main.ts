// Application bootstrap: restore or create a session, mount the chat window
// and (once a knowledge base exists) the structured query builder.

import { ServiceClient } from './api'
import { ChatWindow } from './chat'
import { QueryBuilderPanel } from './panel'

const SESSION_KEY = 'fuzzykb.session'

async function ensureSession(client: ServiceClient): Promise<void> {
  const stored = localStorage.getItem(SESSION_KEY)
  if (stored) {
    client.sessionId = stored
    try {
      await client.schema()
      return
    } catch {
      localStorage.removeItem(SESSION_KEY)
      localStorage.removeItem('fuzzykb.transcript')
    }
  }
  await client.createSession()
  localStorage.setItem(SESSION_KEY, client.sessionId as string)
}

async function mountPanel(client: ServiceClient,
                          host: HTMLElement): Promise<void> {
  const schema = await client.schema()
  host.textContent = ''
  if (!schema.stage.built) {
    const note = document.createElement('p')
    note.className = 'panel-note'
    note.textContent = 'The query builder unlocks after the knowledge base ' +
      'is built (say: "Construct the symbolic explanation module").'
    host.appendChild(note)
    return
  }
  const panel = new QueryBuilderPanel(schema,
    (kind, request) => client.query(kind, request))
  host.appendChild(panel.root)
}

async function start(): Promise<void> {
  const base = (window as { FUZZYKB_BASE_URL?: string }).FUZZYKB_BASE_URL
    ?? `${location.protocol}//${location.host}`
  const client = new ServiceClient(base)
  await ensureSession(client)

  const chatHost = document.getElementById('chat') as HTMLElement
  const panelHost = document.getElementById('panel') as HTMLElement
  const chat = new ChatWindow(client, localStorage)
  chatHost.appendChild(chat.root)
  await mountPanel(client, panelHost)

  // the knowledge base may appear mid-conversation; refresh the panel after
  // each bot reply that announces a build
  const observer = new MutationObserver(() => {
    const last = chat.messages[chat.messages.length - 1]
    if (last && last.author === 'bot' && /knowledge base/.test(last.text)) {
      void mountPanel(client, panelHost)
    }
  })
  observer.observe(chat.root, { childList: true, subtree: true })
}

void start()
