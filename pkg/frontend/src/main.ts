import { ApiClient } from './api.js';
import { Dashboard } from './app.js';

// Served from /ui on the monitoring service itself, or point the dashboard
// at another instance with ?api=http://host:port
const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? window.location.origin;

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app mount point');
}
new Dashboard(new ApiClient(base), root).start();
