import { ApiClient } from "./api";
import { SessionFlow } from "./session";
import { mount } from "./ui";
import "./style.css";

// same-origin by default (the dev server proxies /v1); override with ?api=
const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");

const flow = new SessionFlow(new ApiClient(baseUrl));
mount(root, flow);
void flow.start();
