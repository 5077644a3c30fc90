// Client for the chainprocure HTTP API. Envelopes are built and signed
// here exactly the way the server recomputes them: the transaction digest
// is SHA-256 over canonical {"body","kind","signer","timestamp"} and the
// signature is Ed25519 over those 32 bytes.

import { digestOf, signDigest } from "./crypto.js";
import type { SessionKeys } from "./wallet.js";

export interface Envelope {
  kind: string;
  body: Record<string, unknown>;
  signer: string;
  public_key: string;
  timestamp: number;
  signature: string;
}

export interface ApiResult<T = Record<string, unknown>> {
  ok: boolean;
  status: number;
  data: T;
  error?: string;
  message?: string;
}

export async function buildEnvelope(
  session: SessionKeys,
  kind: string,
  body: Record<string, unknown>,
  timestamp = Date.now(),
): Promise<Envelope> {
  const txDigest = await digestOf({
    body,
    kind,
    signer: session.address,
    timestamp,
  });
  return {
    kind,
    body,
    signer: session.address,
    public_key: session.publicKey,
    timestamp,
    signature: await signDigest(session.privateKey, txDigest),
  };
}

export class ApiClient {
  constructor(readonly base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  async get<T = Record<string, unknown>>(path: string): Promise<ApiResult<T>> {
    return this.request<T>("GET", path);
  }

  async post<T = Record<string, unknown>>(
    path: string,
    payload: unknown,
  ): Promise<ApiResult<T>> {
    return this.request<T>("POST", path, payload);
  }

  private async request<T>(
    method: string,
    path: string,
    payload?: unknown,
  ): Promise<ApiResult<T>> {
    const response = await fetch(this.url(path), {
      method,
      headers: payload === undefined ? {} : { "content-type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
    const data = (await response.json()) as T & { error?: string; message?: string };
    return {
      ok: response.ok,
      status: response.status,
      data,
      error: data?.error,
      message: data?.message,
    };
  }

  // --- signed actions ---

  async registerUser(session: SessionKeys, displayName: string, identityFp: string) {
    return this.post(
      "/users",
      await buildEnvelope(session, "register", {
        public_key: session.publicKey,
        display_name: displayName,
        identity_fingerprint: identityFp,
      }),
    );
  }

  async kycDecision(session: SessionKeys, subject: string, decision: string) {
    return this.post(
      "/kyc/decisions",
      await buildEnvelope(session, "kyc_verify", { subject, decision }),
    );
  }

  async postRfq(
    session: SessionKeys,
    args: { title: string; specFingerprint: string; openAt: number; closeAt: number },
  ) {
    return this.post(
      "/rfqs",
      await buildEnvelope(session, "post_request", {
        title: args.title,
        spec_fingerprint: args.specFingerprint,
        open_at: args.openAt,
        close_at: args.closeAt,
      }),
    );
  }

  async submitBid(
    session: SessionKeys,
    requestId: string,
    price: number,
    docFingerprint: string,
  ) {
    return this.post(
      `/rfqs/${requestId}/bids`,
      await buildEnvelope(session, "submit_bid", {
        request_id: requestId,
        price,
        doc_fingerprint: docFingerprint,
      }),
    );
  }

  async notarize(session: SessionKeys, fingerprint: string, label: string) {
    return this.post(
      "/notarize",
      await buildEnvelope(session, "notarize", {
        fingerprint,
        owner: session.address,
        label,
        ref: null,
      }),
    );
  }

  // --- unsigned triggers and reads ---

  closeRfq(requestId: string) {
    return this.post(`/rfqs/${requestId}/close`, {});
  }

  award(requestId: string, contractFingerprint: string) {
    return this.post(`/rfqs/${requestId}/award`, {
      contract_fingerprint: contractFingerprint,
    });
  }

  cosignContract(contractId: string, signer: string, signature: string) {
    return this.post(`/contracts/${contractId}/cosign`, { signer, signature });
  }

  cosignPending(pendingId: string, signer: string, signature: string) {
    return this.post(`/multisig/pending/${pendingId}/cosign`, { signer, signature });
  }

  listRfqs() {
    return this.get("/rfqs");
  }

  rfq(requestId: string) {
    return this.get(`/rfqs/${requestId}`);
  }

  ranking(requestId: string) {
    return this.get(`/rfqs/${requestId}/ranking`);
  }

  contract(contractId: string) {
    return this.get(`/contracts/${contractId}`);
  }

  pending(pendingId: string) {
    return this.get(`/multisig/pending/${pendingId}`);
  }

  audit(fingerprint: string) {
    return this.get(`/audit/${fingerprint}`);
  }

  health() {
    return this.get("/healthz");
  }
}
