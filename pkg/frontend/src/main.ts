import { ApiClient } from './api.js';
import { App } from './app.js';

document.addEventListener('DOMContentLoaded', () => {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app root element');
  void new App(root, new ApiClient(''), window.localStorage).init();
});
