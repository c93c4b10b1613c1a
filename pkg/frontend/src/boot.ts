/** Browser entry point: mounts the dashboard onto #app. */

import { initDashboard } from './main.js';

declare global {
  interface Window {
    COVMAP_API?: string;
  }
}

const root = document.getElementById('app');
if (root) {
  initDashboard(root, { apiBase: window.COVMAP_API ?? 'http://127.0.0.1:8787' });
}
