// The console app: role tabs over the public API, nothing privileged.
// One wallet per page; every state-changing call is signed locally first.

import { ApiClient } from "./api.js";
import { utf8Bytes } from "./canonical.js";
import { sha256Hex, signDigest } from "./crypto.js";
import {
  SessionKeys,
  clearSession,
  generateWallet,
  loadSession,
  saveSession,
  walletFromJson,
  walletToJson,
} from "./wallet.js";

interface RfqRow {
  request_id: string;
  buyer: string;
  title: string;
  open_at: number;
  close_at: number;
  status: string;
  bid_count: number;
}

interface ApprovalItem {
  contractId: string;
  requestTitle: string;
  status: string; // pending status
  contractStatus: string;
  signingDigest: string;
  collected: string[];
  parties: string[];
}

const TABS = ["wallet", "buyer", "supplier", "approvals", "verifier", "audit"] as const;

export class ConsoleApp {
  readonly api: ApiClient;
  session: SessionKeys | null = null;
  rfqs: RfqRow[] = [];
  approvals: ApprovalItem[] = [];
  selectedRfq: string | null = null;

  private root: HTMLElement;
  private inflight: Promise<void> = Promise.resolve();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, apiBase: string, opts: { pollMs?: number } = {}) {
    this.root = root;
    this.api = new ApiClient(apiBase);
    this.buildSkeleton();
    const pollMs = opts.pollMs ?? 2000;
    if (pollMs > 0) {
      this.timer = setInterval(() => this.track(() => this.refresh()), pollMs);
    }
    this.track(async () => {
      this.session = await loadSession();
      this.renderWallet();
      await this.refresh();
    });
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
  }

  /** Wait for every queued handler to settle; keeps scripted sessions deterministic. */
  idle(): Promise<void> {
    return this.inflight;
  }

  private track(fn: () => Promise<void>): void {
    this.inflight = this.inflight.then(fn).catch((err) => {
      this.setText("#global-error", String(err));
    });
  }

  // ------------------------------------------------------------------ dom

  private q<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.root.querySelector(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found as T;
  }

  private setText(selector: string, text: string): void {
    this.q(selector).textContent = text;
  }

  private value(selector: string): string {
    return this.q<HTMLInputElement | HTMLTextAreaElement>(selector).value.trim();
  }

  private buildSkeleton(): void {
    this.root.innerHTML = `
      <header>
        <h1>chainprocure console</h1>
        <nav id="tabs">${TABS.map(
          (t) => `<button class="tab" id="tab-${t}" data-tab="${t}">${t}</button>`,
        ).join("")}</nav>
        <span id="session-badge">no wallet</span>
        <span id="global-error"></span>
      </header>

      <section class="panel" id="panel-wallet">
        <h2>Wallet</h2>
        <button id="wallet-generate">Generate new wallet</button>
        <div>
          <textarea id="wallet-import-text" placeholder='{"private_key":"...","public_key":"..."}'></textarea>
          <button id="wallet-import">Import key file</button>
          <button id="wallet-forget">Forget wallet</button>
        </div>
        <p>Address: <span id="wallet-address">-</span></p>
        <pre id="wallet-export"></pre>
        <div>
          <input id="register-name" placeholder="display name" />
          <textarea id="register-identity-text" placeholder="identity document text"></textarea>
          <button id="register-submit">Register on platform</button>
          <p id="register-result"></p>
        </div>
      </section>

      <section class="panel" id="panel-buyer">
        <h2>Buyer</h2>
        <input id="buyer-title" placeholder="request title" />
        <textarea id="buyer-spec-text" placeholder="requirements document text"></textarea>
        <input id="buyer-open-in" value="0" title="opens in (ms)" />
        <input id="buyer-window" value="60000" title="window length (ms)" />
        <button id="buyer-post">Post request</button>
        <p id="buyer-result"></p>
        <h3>Award a closed request</h3>
        <input id="award-request" placeholder="request id" />
        <textarea id="award-contract-text" placeholder="contract document text"></textarea>
        <button id="award-submit">Award to lowest bid</button>
        <p id="award-result"></p>
      </section>

      <section class="panel" id="panel-supplier">
        <h2>Supplier</h2>
        <table id="rfq-table">
          <thead><tr><th>title</th><th>status</th><th>bids</th><th>closes in</th><th></th></tr></thead>
          <tbody id="rfq-list"></tbody>
        </table>
        <p>Selected request: <span id="supplier-selected">-</span></p>
        <input id="supplier-price" placeholder="price (minor units)" />
        <textarea id="supplier-doc-text" placeholder="bid document text"></textarea>
        <button id="supplier-bid">Submit bid</button>
        <p id="supplier-result"></p>
        <h3>Ranking</h3>
        <table>
          <thead><tr><th>price</th><th>supplier</th></tr></thead>
          <tbody id="ranking-table"></tbody>
        </table>
      </section>

      <section class="panel" id="panel-approvals">
        <h2>Approvals</h2>
        <ul id="approvals-list"></ul>
        <p id="approvals-result"></p>
      </section>

      <section class="panel" id="panel-verifier">
        <h2>Verifier</h2>
        <input id="verifier-subject" placeholder="subject address" />
        <button id="verifier-approve">Approve KYC</button>
        <button id="verifier-reject">Reject KYC</button>
        <p id="verifier-result"></p>
      </section>

      <section class="panel" id="panel-audit">
        <h2>Audit</h2>
        <textarea id="audit-text" placeholder="paste document text"></textarea>
        <button id="audit-run">Fingerprint and audit</button>
        <p id="audit-fingerprint"></p>
        <p id="audit-result"></p>
        <ul id="audit-records"></ul>
      </section>
    `;

    for (const tab of TABS) {
      this.q(`#tab-${tab}`).addEventListener("click", () => this.showTab(tab));
    }
    this.showTab("wallet");

    this.q("#wallet-generate").addEventListener("click", () =>
      this.track(async () => {
        this.session = await generateWallet();
        saveSession(this.session);
        this.renderWallet();
      }),
    );
    this.q("#wallet-import").addEventListener("click", () =>
      this.track(async () => {
        this.session = await walletFromJson(this.value("#wallet-import-text"));
        saveSession(this.session);
        this.renderWallet();
        await this.refresh();
      }),
    );
    this.q("#wallet-forget").addEventListener("click", () =>
      this.track(async () => {
        this.session = null;
        clearSession();
        this.renderWallet();
      }),
    );
    this.q("#register-submit").addEventListener("click", () =>
      this.track(() => this.registerUser()),
    );
    this.q("#buyer-post").addEventListener("click", () =>
      this.track(() => this.postRfq()),
    );
    this.q("#award-submit").addEventListener("click", () =>
      this.track(() => this.award()),
    );
    this.q("#supplier-bid").addEventListener("click", () =>
      this.track(() => this.submitBid()),
    );
    this.q("#verifier-approve").addEventListener("click", () =>
      this.track(() => this.decideKyc("verified")),
    );
    this.q("#verifier-reject").addEventListener("click", () =>
      this.track(() => this.decideKyc("rejected")),
    );
    this.q("#audit-run").addEventListener("click", () =>
      this.track(() => this.runAudit()),
    );
  }

  showTab(tab: (typeof TABS)[number]): void {
    for (const t of TABS) {
      this.q(`#panel-${t}`).style.display = t === tab ? "block" : "none";
      this.q(`#tab-${t}`).classList.toggle("active", t === tab);
    }
  }

  private renderWallet(): void {
    const badge = this.session ? this.session.address : "no wallet";
    this.setText("#session-badge", badge);
    this.setText("#wallet-address", this.session ? this.session.address : "-");
    this.q("#wallet-export").textContent = this.session
      ? walletToJson(this.session)
      : "";
  }

  private requireSession(): SessionKeys {
    if (!this.session) throw new Error("no wallet loaded");
    return this.session;
  }

  private resultLine(result: {
    ok: boolean;
    error?: string;
    message?: string;
    data: Record<string, unknown>;
  }): string {
    if (result.ok) {
      const txId = result.data["tx_id"];
      const height = result.data["block_height"];
      return `ok: tx ${String(txId).slice(0, 12)} in block ${height} (notarized)`;
    }
    return `${result.error}: ${result.message ?? ""}`;
  }

  // ------------------------------------------------------------- actions

  private async registerUser(): Promise<void> {
    const session = this.requireSession();
    const identity = await sha256Hex(utf8Bytes(this.value("#register-identity-text")));
    const result = await this.api.registerUser(
      session,
      this.value("#register-name"),
      identity,
    );
    this.setText("#register-result", this.resultLine(result));
  }

  private async decideKyc(decision: string): Promise<void> {
    const session = this.requireSession();
    const result = await this.api.kycDecision(
      session,
      this.value("#verifier-subject"),
      decision,
    );
    this.setText("#verifier-result", this.resultLine(result));
  }

  private async postRfq(): Promise<void> {
    const session = this.requireSession();
    const specFingerprint = await sha256Hex(utf8Bytes(this.value("#buyer-spec-text")));
    const now = Date.now();
    const openAt = now + Number(this.value("#buyer-open-in") || "0");
    const closeAt = openAt + Number(this.value("#buyer-window") || "0");
    const result = await this.api.postRfq(session, {
      title: this.value("#buyer-title"),
      specFingerprint,
      openAt,
      closeAt,
    });
    if (result.ok) {
      const record = result.data["record"] as Record<string, unknown>;
      this.setText("#buyer-result", `posted ${record["request_id"]}`);
      await this.refresh();
    } else {
      this.setText("#buyer-result", this.resultLine(result));
    }
  }

  private async submitBid(): Promise<void> {
    const session = this.requireSession();
    if (!this.selectedRfq) {
      this.setText("#supplier-result", "select a request first");
      return;
    }
    const docFingerprint = await sha256Hex(utf8Bytes(this.value("#supplier-doc-text")));
    const result = await this.api.submitBid(
      session,
      this.selectedRfq,
      Number(this.value("#supplier-price")),
      docFingerprint,
    );
    if (result.ok) {
      const record = result.data["record"] as Record<string, unknown>;
      this.setText(
        "#supplier-result",
        `bid accepted: receipt ${String(record["receipt_tx"]).slice(0, 12)} (notarized)`,
      );
      await this.refresh();
    } else {
      this.setText("#supplier-result", this.resultLine(result));
    }
  }

  private async closeRfq(requestId: string): Promise<void> {
    const result = await this.api.closeRfq(requestId);
    this.setText(
      "#supplier-result",
      result.ok ? `closed ${requestId.slice(0, 12)}` : this.resultLine(result),
    );
    await this.refresh();
  }

  private async award(): Promise<void> {
    this.requireSession();
    const contractFp = await sha256Hex(utf8Bytes(this.value("#award-contract-text")));
    const result = await this.api.award(this.value("#award-request"), contractFp);
    if (result.ok) {
      const record = result.data["record"] as Record<string, unknown>;
      this.setText("#award-result", `contract ${record["contract_id"]}`);
      await this.refresh();
    } else {
      this.setText("#award-result", this.resultLine(result));
    }
  }

  private async cosign(item: ApprovalItem): Promise<void> {
    const session = this.requireSession();
    const signature = await signDigest(session.privateKey, item.signingDigest);
    const result = await this.api.cosignContract(
      item.contractId,
      session.address,
      signature,
    );
    this.setText("#approvals-result", this.resultLine(result));
    await this.refresh();
  }

  private async runAudit(): Promise<void> {
    const fingerprint = await sha256Hex(utf8Bytes(this.value("#audit-text")));
    this.setText("#audit-fingerprint", `fingerprint ${fingerprint}`);
    const result = await this.api.audit(fingerprint);
    const found = Boolean(result.data["found"]);
    this.setText("#audit-result", found ? "found on-chain" : "not found");
    const list = this.q("#audit-records");
    list.innerHTML = "";
    for (const record of (result.data["records"] as Record<string, unknown>[]) ?? []) {
      const li = document.createElement("li");
      li.textContent = `block ${record["block_height"]} by ${record["owner"]} (${record["label"]})`;
      list.appendChild(li);
    }
  }

  // ------------------------------------------------------------- refresh

  async refresh(): Promise<void> {
    const listing = await this.api.listRfqs();
    if (!listing.ok) return;
    this.rfqs = (listing.data["requests"] as RfqRow[]) ?? [];
    this.renderRfqs();
    await this.refreshApprovals();
    if (this.selectedRfq) await this.renderRanking(this.selectedRfq);
  }

  private renderRfqs(): void {
    const tbody = this.q("#rfq-list");
    tbody.innerHTML = "";
    for (const rfq of this.rfqs) {
      const row = document.createElement("tr");
      row.dataset["requestId"] = rfq.request_id;
      const remaining = Math.max(0, rfq.close_at - Date.now());
      row.innerHTML = `
        <td class="title">${rfq.title}</td>
        <td class="status">${rfq.status}</td>
        <td class="bids">${rfq.bid_count}</td>
        <td class="countdown">${rfq.status === "open" ? Math.ceil(remaining / 1000) + "s" : "-"}</td>
        <td></td>`;
      const actions = row.lastElementChild as HTMLElement;
      const select = document.createElement("button");
      select.textContent = "select";
      select.className = "select-rfq";
      select.addEventListener("click", () =>
        this.track(async () => {
          this.selectedRfq = rfq.request_id;
          this.setText("#supplier-selected", rfq.request_id);
          await this.renderRanking(rfq.request_id);
        }),
      );
      actions.appendChild(select);
      if (rfq.status === "open" && remaining === 0) {
        const close = document.createElement("button");
        close.textContent = "close";
        close.className = "close-rfq";
        close.addEventListener("click", () =>
          this.track(() => this.closeRfq(rfq.request_id)),
        );
        actions.appendChild(close);
      }
      tbody.appendChild(row);
    }
  }

  private async renderRanking(requestId: string): Promise<void> {
    const result = await this.api.ranking(requestId);
    const tbody = this.q("#ranking-table");
    tbody.innerHTML = "";
    if (!result.ok) return;
    for (const bid of (result.data["ranking"] as Record<string, unknown>[]) ?? []) {
      const row = document.createElement("tr");
      row.innerHTML = `<td class="price">${bid["price"]}</td><td class="supplier">${bid["supplier"]}</td>`;
      tbody.appendChild(row);
    }
  }

  private async refreshApprovals(): Promise<void> {
    const items: ApprovalItem[] = [];
    const session = this.session;
    if (session) {
      for (const rfq of this.rfqs) {
        if (rfq.status !== "awarded" && rfq.status !== "contracted") continue;
        const detail = await this.api.rfq(rfq.request_id);
        if (!detail.ok) continue;
        const chainResult = await this.findContractFor(rfq.request_id);
        if (!chainResult) continue;
        const { contractId } = chainResult;
        const contractView = await this.api.contract(contractId);
        if (!contractView.ok) continue;
        const contract = contractView.data["contract"] as Record<string, unknown>;
        const pending = contractView.data["pending"] as Record<string, unknown>;
        const bids = (detail.data["bids"] as Record<string, unknown>[]) ?? [];
        const winner = bids.find((b) => b["bid_id"] === contract["winning_bid"]);
        const parties = [rfq.buyer, String(winner?.["supplier"] ?? "")];
        if (!parties.includes(session.address)) continue;
        items.push({
          contractId,
          requestTitle: rfq.title,
          status: String(pending["status"]),
          contractStatus: String(contract["status"]),
          signingDigest: String(contractView.data["signing_digest"]),
          collected: Object.keys(pending["collected"] as Record<string, unknown>),
          parties,
        });
      }
    }
    this.approvals = items;
    this.renderApprovals();
  }

  private contractIndex = new Map<string, string>(); // request_id -> contract_id

  private async findContractFor(requestId: string): Promise<{ contractId: string } | null> {
    const cached = this.contractIndex.get(requestId);
    if (cached) return { contractId: cached };
    const chain = await this.api.get("/chain");
    if (!chain.ok) return null;
    for (const block of (chain.data["blocks"] as Record<string, unknown>[]) ?? []) {
      for (const tx of (block["transactions"] as Record<string, unknown>[]) ?? []) {
        if (tx["kind"] !== "issue_contract") continue;
        const body = tx["body"] as Record<string, unknown>;
        this.contractIndex.set(String(body["request_id"]), String(tx["tx_id"]));
      }
    }
    const found = this.contractIndex.get(requestId);
    return found ? { contractId: found } : null;
  }

  private renderApprovals(): void {
    const list = this.q("#approvals-list");
    list.innerHTML = "";
    const session = this.session;
    for (const item of this.approvals) {
      const li = document.createElement("li");
      li.dataset["contractId"] = item.contractId;
      const label = document.createElement("span");
      label.className = "approval-status";
      label.textContent = `${item.requestTitle}: contract ${item.contractStatus}, pending ${item.status}`;
      li.appendChild(label);
      const canSign =
        session !== null &&
        item.status === "open" &&
        !item.collected.includes(session.address);
      if (canSign) {
        const button = document.createElement("button");
        button.textContent = "co-sign";
        button.className = "cosign";
        button.addEventListener("click", () => this.track(() => this.cosign(item)));
        li.appendChild(button);
      }
      list.appendChild(li);
    }
  }
}
