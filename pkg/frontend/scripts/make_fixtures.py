#!/usr/bin/env python3
"""Record real service payloads for the frontend test suite.

Drives a scripted conversation (load -> stats -> train -> build -> what-if ->
counterfactual -> top rules) against the in-process service and captures every
response verbatim, plus the structured-endpoint result for the same what-if
question so the tests can check that both paths agree. Run from the repo root:

    python frontend/scripts/make_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from fuzzykb.service import create_app

ROOT = Path(__file__).resolve().parents[2]
OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

SCRIPT = [
    "Load the diabetes dataset",
    "Tell me more about the data.",
    "How is Age distributed?",
    "Train the model on this data.",
    "Can you construct the symbolic explanation module?",
    "If Plas is very low and the outcome is tested_negative, what is Age?",
    "What values should Plas and Mass take while Age is very low for the "
    "outcome to be tested_negative instead of tested_positive?",
    "What are the top rules in the knowledge base?",
]

NL_WHATIF_INDEX = 5
STRUCTURED_BODY = {
    "desired_class": "tested_negative",
    "unknowns": ["Age"],
    "known": {"Plas": "very_low"},
    "limit": 3,
}


def main():
    app = create_app(datasets_dir=ROOT / "data")
    with TestClient(app) as client:
        sid = client.post("/sessions").json()["session_id"]
        steps = []
        for text in SCRIPT:
            response = client.post(f"/sessions/{sid}/message",
                                   json={"text": text})
            response.raise_for_status()
            steps.append({"text": text, "response": response.json()})

        structured = client.post(f"/sessions/{sid}/query/whatif",
                                 json=STRUCTURED_BODY).json()
        schema = client.get(f"/sessions/{sid}/schema").json()

    # the NL reply must already quote the structured result at 3 decimals
    nl_reply = steps[NL_WHATIF_INDEX]["response"]["reply_text"]
    top = structured["solutions"][0]
    binding = top["bindings"]["Age"]
    assert f"{binding['confidence']:.3f}" in nl_reply, nl_reply
    assert f"{top['rule_confidence']:.3f}" in nl_reply, nl_reply

    OUT.mkdir(parents=True, exist_ok=True)
    doc = {
        "conversation": steps,
        "nl_whatif_index": NL_WHATIF_INDEX,
        "structured_whatif": {"body": STRUCTURED_BODY, "result": structured},
        "schema": schema,
    }
    (OUT / "conversation.json").write_text(json.dumps(doc, indent=2),
                                           encoding="utf-8")
    print(f"wrote {OUT / 'conversation.json'} "
          f"({len(steps)} steps, {len(json.dumps(doc)) // 1024} KiB)")


if __name__ == "__main__":
    main()
