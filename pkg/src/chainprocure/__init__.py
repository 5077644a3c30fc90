"""chainprocure: blockchain-backed e-procurement.

Hash-chained ledger, Ed25519 identities, M-of-N multi-level multisig,
document notarization, and a KYC-gated bidding workflow, exposed over a
JSON HTTP API with event-sourced persistence.
"""

__version__ = "0.1.0"
