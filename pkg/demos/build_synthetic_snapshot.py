"""Rebuild the bundled synthetic snapshot fixture.

The fixture holds 129 analyzable projects whose per-dimension hazard flags hit
fixed marginal counts (exit-window 111, proposer-failure 65, data-availability
35, state-validation 32, sequencer-failure 17), plus two deliberately
non-conforming extras that exercise the skip/exclude warnings. Which projects
carry which flag is sampled from a fixed seed, so rerunning this script is
byte-stable. Run from the repository root:

    python demos/build_synthetic_snapshot.py
"""

import json
import random
from pathlib import Path

TOTAL = 129
MARGINALS = {
    # dimension -> number of projects flagged for it
    "State validation": 32,
    "Exit window": 111,
    "Proposer failure": 65,
    "Sequencer failure": 17,
    "Data availability": 35,
}

HAZARDOUS = {
    "State validation": {
        "value": "none",
        "description": "No state validation: the system permits invalid state roots.",
    },
    "Exit window": {
        "value": "none",
        "description": (
            "There is no window for users to exit in case of an unwanted regular "
            "upgrade since contracts are instantly upgradable."
        ),
    },
    "Proposer failure": {
        "value": "cannot withdraw",
        "description": (
            "Only the whitelisted proposers can publish state roots on L1, so in "
            "the event of failure the withdrawals are frozen."
        ),
    },
    "Sequencer failure": {
        "value": "no mechanism",
        "description": (
            "There is no mechanism to have transactions be included if the "
            "sequencer is down or censoring."
        ),
    },
    "Data availability": {
        "value": "external",
        "description": (
            "Proof construction and state derivation rely fully on data that is "
            "NOT published onchain."
        ),
    },
}

BENIGN = {
    "State validation": {
        "value": "validity proofs",
        "description": "State roots are checked on L1 before they finalize.",
    },
    "Exit window": {
        "value": "30d",
        "description": "Upgrades wait out a 30-day timelock during which users can exit.",
    },
    "Proposer failure": {
        "value": "self propose",
        "description": "Anyone can step in to publish state roots after a grace period.",
    },
    "Sequencer failure": {
        "value": "force via l1",
        "description": "Users can force transactions through an L1 queue if the operator stalls.",
    },
    "Data availability": {
        "value": "onchain",
        "description": "All data needed to rebuild the state is posted onchain.",
    },
}

CATEGORIES = ["Optimistic Rollup", "ZK Rollup", "Other"]
BENIGN_SENTIMENTS = ["good", "neutral", "warning"]


def build() -> dict:
    rng = random.Random(917)
    flagged: dict[str, set[int]] = {
        dim: set(rng.sample(range(TOTAL), k)) for dim, k in MARGINALS.items()
    }

    projects = []
    for i in range(TOTAL):
        risks = []
        for d, dim in enumerate(MARGINALS):
            if i in flagged[dim]:
                risks.append(
                    {
                        "name": dim,
                        "value": HAZARDOUS[dim]["value"],
                        "sentiment": "bad",
                        "description": HAZARDOUS[dim]["description"],
                    }
                )
            else:
                risks.append(
                    {
                        "name": dim,
                        "value": BENIGN[dim]["value"],
                        "sentiment": BENIGN_SENTIMENTS[(i + d) % len(BENIGN_SENTIMENTS)],
                        "description": BENIGN[dim]["description"],
                    }
                )
        projects.append(
            {
                "id": f"rollup-{i:03d}",
                "name": f"Rollup {i:03d}",
                "category": CATEGORIES[i % len(CATEGORIES)],
                "risks": risks,
            }
        )

    # Ingestion quirks the parser must tolerate: an untracked risk name on the
    # first project and shouty spacing on the second project's risk name.
    projects[0]["risks"].append(
        {
            "name": "State derivation",
            "value": "documented",
            "sentiment": "neutral",
            "description": "Node software and derivation spec are published.",
        }
    )
    projects[1]["risks"][3]["name"] = " Sequencer  Failure "

    # Non-conforming extras: excluded category and missing category.
    projects.append(
        {
            "id": "extra-validium",
            "name": "Extra Validium",
            "category": "Validium",
            "risks": [
                {
                    "name": "Data availability",
                    "value": "external",
                    "sentiment": "bad",
                    "description": HAZARDOUS["Data availability"]["description"],
                }
            ],
        }
    )
    projects.append({"id": "extra-uncategorized", "name": "Extra Uncategorized", "risks": []})
    return {"projects": projects}


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "src" / "l2risk" / "data" / "snapshot-fixture.json"
    doc = build()
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    conforming = [p for p in doc["projects"] if p.get("category") in CATEGORIES]
    print(f"wrote {out} ({len(conforming)} conforming projects, {len(doc['projects'])} total)")


if __name__ == "__main__":
    main()
