"""Report emission: JSON and delimited files plus rendered figures.

Every eval command writes its metrics as JSON, CSV, and a plot-ready
long-format TSV, and renders a PNG figure next to them.  Output is
byte-deterministic for identical inputs.
"""

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_PNG_METADATA = {"Software": "senseforge"}

_CATEGORIES = ("all", "nouns", "verbs")
_METRICS = ("v_score", "f1", "average")


def _write_json(payload, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_wsi_report(report, out_dir, system_name):
    """Emit report.json / report.csv / report.tsv / report.png."""
    payload = {"system": system_name, **report.to_dict()}
    _write_json(payload, out_dir / "report.json")

    header = ["system"]
    row = [system_name]
    cats = {"all": report.all, "nouns": report.nouns, "verbs": report.verbs}
    for metric in _METRICS:
        for cat in _CATEGORIES:
            header.append("%s_%s" % (metric, cat))
            scores = cats[cat]
            value = {"v_score": scores.v, "f1": scores.f1, "average": scores.average}[metric]
            row.append("%.6f" % value)
    header.append("c")
    row.append("%.6f" % report.mean_clusters)
    with open(out_dir / "report.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerow(row)

    with open(out_dir / "report.tsv", "w", encoding="utf-8") as fh:
        fh.write("system\tmetric\tcategory\tvalue\n")
        for metric in _METRICS:
            for cat in _CATEGORIES:
                scores = cats[cat]
                value = {"v_score": scores.v, "f1": scores.f1, "average": scores.average}[metric]
                fh.write("%s\t%s\t%s\t%.6f\n" % (system_name, metric, cat, value))
        fh.write("%s\tmean_clusters\tall\t%.6f\n" % (system_name, report.mean_clusters))

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    width = 0.25
    offsets = (-width, 0.0, width)
    for metric, offset in zip(_METRICS, offsets):
        values = [{"v_score": cats[c].v, "f1": cats[c].f1,
                   "average": cats[c].average}[metric] for c in _CATEGORIES]
        ax.bar([i + offset for i in range(len(_CATEGORIES))], values, width, label=metric)
    ax.set_xticks(range(len(_CATEGORIES)))
    ax.set_xticklabels(_CATEGORIES)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("WSI scores: %s (C=%.2f)" % (system_name, report.mean_clusters))
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    fig.savefig(out_dir / "report.png", dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def write_lexical_choice(rho_result, confusion, out_dir, system_name):
    """Emit lexical_choice.json / .csv / .png for the rho evaluation."""
    payload = {
        "system": system_name,
        "n_improved": rho_result.n_improved,
        "n_degraded": rho_result.n_degraded,
        "t": rho_result.t,
        "rho": rho_result.rho,
        "confusion": {"cc": confusion.cc, "ci": confusion.ci,
                      "ic": confusion.ic, "ii": confusion.ii},
    }
    _write_json(payload, out_dir / "lexical_choice.json")

    with open(out_dir / "lexical_choice.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["system", "n_improved", "n_degraded", "t", "rho",
                         "cc", "ci", "ic", "ii"])
        writer.writerow([system_name, rho_result.n_improved, rho_result.n_degraded,
                         rho_result.t, "%.6f" % rho_result.rho,
                         confusion.cc, confusion.ci, confusion.ic, confusion.ii])

    grid = [[confusion.cc, confusion.ci], [confusion.ic, confusion.ii]]
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(grid, cmap="Blues")
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(grid[i][j]), ha="center", va="center")
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["baseline correct", "baseline incorrect"])
    ax.set_yticks([0, 1])
    ax.set_yticklabels(["system\ncorrect", "system\nincorrect"])
    ax.set_title("Lexical choice: %s (rho=%.4f)" % (system_name, rho_result.rho))
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(out_dir / "lexical_choice.png", dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
