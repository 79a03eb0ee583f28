import { ApiClient } from "./api.js";
import { App } from "./app.js";

function required(key: string, prompt_text: string): string {
  let value = localStorage.getItem(key) ?? "";
  if (!value) {
    value = window.prompt(prompt_text) ?? "";
    if (value) localStorage.setItem(key, value);
  }
  return value;
}

const token = required("hintqa-token", "Annotation token:");
const annotator = required("hintqa-annotator", "Your annotator name:");

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = new App(root, new ApiClient("", token), { annotator });
void app.start();
