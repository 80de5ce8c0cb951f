// Entry point for the browser build. Reads ?service=host:port&session=id
// from the query string, mounts the console, and starts the client.

import { ConsoleClient } from './client.js';
import { mount } from './ui.js';

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const service = params.get('service') ?? '127.0.0.1:8930';
  const session = params.get('session');
  const root = document.getElementById('console');
  if (!root) throw new Error('missing #console mount point');

  if (!session) {
    root.textContent = 'open with ?service=host:port&session=<session-id>';
    return;
  }

  const client = new ConsoleClient({ service, sessionId: session }, (model) => ui.update(model));
  const ui = mount(root, {
    onTrigger: () => void client.trigger(),
    onConfirm: () => void client.confirm(),
  });
  void client.start();
  window.addEventListener('beforeunload', () => {
    client.dispose();
    ui.dispose();
  });
}

boot();
