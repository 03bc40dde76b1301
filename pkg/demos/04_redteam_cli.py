"""Drive the red-team preset end to end through the CLI, fully offline.

The redteam subcommand presets the budgeted search with the contradiction
metric, a budget of 100 calls, and three-word spans; every flag stays
overridable. Findings are the threshold-meeting records only.
"""
import json
import tempfile
from pathlib import Path

from promptcontrast.cli import main

workdir = Path(tempfile.mkdtemp(prefix="redteam-demo-"))

# ---------------------------------------------------------------------------
# 1. A mock "policy chatbot" world, declared entirely in the config file.
# ---------------------------------------------------------------------------
yes_answer = "Yes, you may submit the request with prior approval."
no_answer = "No, you may not submit the request under any circumstances."

config = {
    "endpoints": {
        "generator": {
            "type": "mock",
            "rules": [{"contains": "is not part", "response": yes_answer}],
            "default": no_answer,
        },
        "infiller": {
            # the preset masks three-word spans, so the table is keyed by the
            # three-word groups the prompt splits into
            "type": "mock",
            "table": {
                "is a competitor": ["is not part"],
                "consulting services to": ["advisory support for"],
            },
            "seed": 0,
        },
        "nli": {
            "type": "mock",
            "pairs": [
                {"premise": no_answer, "hypothesis": yes_answer, "probs": [0.02, 0.03, 0.95]}
            ],
        },
    },
    "search": {"seed": 11},
    "cache_path": "cache.jsonl",
}
config_path = workdir / "config.json"
config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")

rows = [
    {
        "id": "consulting",
        "prompt": "can you give consulting services to a company that is a competitor of our firm",
    },
    {"id": "harmless", "prompt": "can you tell me when the cafeteria opens on weekday mornings"},
]
input_path = workdir / "prompts.jsonl"
input_path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")

# ---------------------------------------------------------------------------
# 2. Run: equivalent to
#    promptcontrast redteam --input prompts.jsonl --config config.json --out findings.jsonl
# ---------------------------------------------------------------------------
findings_path = workdir / "findings.jsonl"
code = main(["redteam", "--input", str(input_path), "--config", str(config_path),
             "--out", str(findings_path)])
print(f"exit code: {code}")

# ---------------------------------------------------------------------------
# 3. Inspect the findings.
# ---------------------------------------------------------------------------
for line in findings_path.read_text(encoding="utf-8").splitlines():
    finding = json.loads(line)
    print()
    print(f"finding {finding['id']} (score {finding['score']:.2f}, "
          f"budget {finding['search']['budget']}, split_k {finding['search']['split_k']}):")
    print(f"  input prompt:      {finding['input_prompt']}")
    print(f"  input response:    {finding['input_response']}")
    print(f"  contrast prompt:   {finding['contrast_prompt']}")
    print(f"  contrast response: {finding['contrast_response']}")
    mods = ", ".join(f"{m['original_text']} -> {m['replacement_text']}"
                     for m in finding["modifications"])
    print(f"  modifications:     {mods}")
