/**
 * Browser entry point. The session-service base URL defaults to the local
 * development server and can be overridden with `?api=http://host:port`.
 */

import { HttpSessionClient } from './client.js';
import { AnnotatorStore } from './state.js';
import { App } from './app.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('api') ?? 'http://127.0.0.1:8750';

const client = new HttpSessionClient(baseUrl);
const store = new AnnotatorStore({ client });
const app = new App(store);

document.getElementById('root')!.append(app.element);
