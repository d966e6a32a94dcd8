"""JSON and table renderings of scenario, validation and audit results.

JSON output is emitted with sorted keys and no wall-clock data, so identical
inputs give byte-identical text.
"""

from __future__ import annotations

import json
from typing import Any, List, Optional, Sequence

from .fixture import attestation_text
from .formula import to_json as formula_json
from .formula import to_text
from .ledger import AuditReport, Ledger, Suspects, audit_chain
from .logic import Attestation, DerivationChain
from .scenario import ScenarioReport
from .schengen import ValidationReport
from .syntax import Formula

SCHEMA_VERSION = 1


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _chain(c: Optional[DerivationChain]) -> Optional[dict]:
    if c is None:
        return None
    return {"links": [{"authority": a, "rule": r.value} for a, r in c.links], "accountable": c.accountable}


def claim_json(a: Attestation) -> dict:
    return {
        "claim": attestation_text(a),
        "claimer": a.claimer,
        "accountable": a.accountable,
        "chain": _chain(a.provenance),
    }


def ledger_json(ledger: Ledger) -> dict:
    return {
        "entries": len(ledger.entries),
        "head": ledger.head.hex(),
        "audit": audit_json(audit_chain(ledger)),
    }


def audit_json(rep: AuditReport) -> dict:
    return {"status": "Ok" if rep.ok else "Broken", "broken_at": rep.broken_at, "entries": rep.entries, "reason": rep.reason}


def validation_json(rep: ValidationReport) -> dict:
    return {
        "kind": "validation-report",
        "version": SCHEMA_VERSION,
        "requester": rep.requester,
        "demand": rep.demand,
        "passed": rep.passed,
        "rows": [
            {
                "number": row.number,
                "requirement": row.requirement,
                "passed": row.passed,
                "claims": [
                    {
                        "claim": attestation_text(c.claim),
                        "holds": c.holds,
                        "accountable": c.accountable,
                        "chain": _chain(c.chain),
                    }
                    for c in row.claims
                ],
                "conditions": [{"name": n, "holds": ok} for n, ok in row.conditions],
            }
            for row in rep.rows
        ],
    }


def scenario_json(rep: ScenarioReport) -> dict:
    answers = []
    for i, ans in rep.answers:
        claims = [claim_json(c) for c in ans.claims] if isinstance(ans, Suspects) else []
        answers.append({"step": i, "answer": "Suspects" if claims else "Valid", "claims": claims})
    return {
        "kind": "scenario-report",
        "version": SCHEMA_VERSION,
        "scenario": rep.scenario,
        "modes": {
            "passport_rule": rep.modes.passport_rule,
            "itinerary_rule": rep.modes.itinerary_rule,
            "record_controls": rep.modes.record_controls,
        },
        "steps": [{"index": o.index, "kind": o.kind, "summary": o.summary} for o in rep.outcomes],
        "answers": answers,
        "alerts": [a for a in answers if a["answer"] == "Suspects"],
        "accountability": [
            {"requirement": req, "claim": claim, "accountable": who} for req, claim, who in rep.accountability()
        ],
        "ledger": ledger_json(rep.ledger),
    }


def formula_report(f: Formula) -> dict:
    return {"kind": "formula", "version": SCHEMA_VERSION, "text": to_text(f), "ast": formula_json(f)}


# tables --------------------------------------------------------------------


def table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def scenario_table(rep: ScenarioReport) -> str:
    parts: List[str] = [f"scenario {rep.scenario}", ""]
    parts.append(table(["#", "step", "outcome"], [(o.index, o.kind, o.summary) for o in rep.outcomes]))
    parts += ["", table(["requirement", "claim", "accountable"], rep.accountability())]
    alerts = rep.alerts
    parts.append("")
    if alerts:
        for i, ans in alerts:
            parts.append(f"ALERT at step {i}: {len(ans.claims)} suspicious claim(s)")
            parts += [f"  {attestation_text(c)}  [accountable {c.accountable}]" for c in ans.claims]
    else:
        parts.append("no alerts")
    parts.append(f"ledger: {len(rep.ledger.entries)} entries, head {rep.ledger.head.hex()[:16]}, {audit_chain(rep.ledger)}")
    return "\n".join(parts) + "\n"


def validation_table(rep: ValidationReport) -> str:
    rows = []
    for row in rep.rows:
        claims = "; ".join(attestation_text(c.claim) + ("" if c.holds else " (missing)") for c in row.claims) or "(none)"
        conds = ", ".join(f"{n}={'yes' if ok else 'no'}" for n, ok in row.conditions)
        rows.append((row.number, row.requirement, "pass" if row.passed else "FAIL", ",".join(row.accountable), claims, conds))
    head = f"demand {rep.demand} by {rep.requester}: {'valid' if rep.passed else 'invalid'}"
    return head + "\n\n" + table(["#", "requirement", "result", "accountable", "claims", "conditions"], rows) + "\n"
