import { ConsoleApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8460";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
new ConsoleApp(root, apiBase);
