"""Shared builders for hand-made traces."""

from __future__ import annotations

from resilience_lab.core import Log, PartyId, Receipt, Trace


def make_trace(logs: dict[str, list[list[str]]], *, awake: dict[str, list[bool]] | None = None,
               receipts: list[tuple[int, str, PartyId]] = (), n: int = 4,
               honest_validators: tuple[int, ...] = (0, 1, 2, 3), communicating: bool = False) -> Trace:
    horizon = max(len(rows) for rows in logs.values())
    client_logs = {c: [Log(r) for r in rows] for c, rows in logs.items()}
    flags = {c: list((awake or {}).get(c, [True] * horizon)) for c in logs}
    return Trace(
        n=n,
        horizon=horizon,
        honest_clients=tuple(sorted(logs)),
        honest_validators=honest_validators,
        communicating=communicating,
        client_logs=client_logs,
        client_awake=flags,
        receipts=[Receipt(r, tx, p) for r, tx, p in receipts],
    )


def brute_force_safe(trace: Trace) -> bool:
    """Every pair of (client, round) logs, compared element by element."""
    cells = [(c, r) for c in trace.honest_clients for r in range(len(trace.client_logs[c]))]
    for c1, r1 in cells:
        a = list(trace.client_logs[c1][r1])
        for c2, r2 in cells:
            b = list(trace.client_logs[c2][r2])
            k = min(len(a), len(b))
            if any(a[i] != b[i] for i in range(k)):
                return False
    return True


# criterion number -> "criterion N: PASS|FAIL ..." line, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def report(number: int, title: str, failures: list[str]) -> None:
    status = "PASS" if not failures else "FAIL"
    detail = "" if not failures else f" ({len(failures)} failing: {'; '.join(failures[:4])})"
    line = f"criterion {number}: {status} {title}{detail}"
    ACCEPTANCE[number] = line
    print(line)
    assert not failures, line
