import os
import argparse
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns
from calderon.utils.configs import get_logger, load_config


def save_fig(name):
    plt.savefig(f"{name}.pdf", format="pdf", dpi=300, bbox_inches="tight")


def plot_ratios(trials: pd.DataFrame, theorem_id: str, figures_dir: str):
    """Strip plot of per-trial ratios against size, with the per-size maximum overlaid."""
    df = trials[trials["theorem_id"] == theorem_id]
    if df.empty or "ratio" not in df:
        return None
    x = "p" if "p" in df and df["p"].notna().any() else "size"
    fig, ax = plt.subplots(figsize=(7, 4))
    hue = "function" if "function" in df and df["function"].notna().any() else None
    sns.stripplot(data=df, x=x, y="ratio", hue=hue, alpha=0.5, jitter=0.25, ax=ax)
    maxima = df.groupby(x)["ratio"].max().reset_index()
    sns.pointplot(data=maxima, x=x, y="ratio", color="black", markers="_", linestyles="", ax=ax)
    sns.despine()
    ax.set_title(theorem_id)
    ax.set_ylabel("ratio")
    path = os.path.join(figures_dir, theorem_id)
    save_fig(path)
    plt.close(fig)
    return path + ".pdf"


if __name__ == "__main__":
    config, project_root = load_config()
    results_dir = config["paths"]["output_paths"]["RESULTS_DIR"]

    parser = argparse.ArgumentParser(description="Plot per-trial ratios from a verification CSV.")
    parser.add_argument("--trials-csv", type=str, required=True, help="The *_trials.csv written by `verify --out`.")
    parser.add_argument(
        "--experiments",
        nargs="+",
        type=str,
        default=None,
        help="Experiment ids to plot. Defaults to every id in the CSV.",
    )
    parser.add_argument("--figures-dir", type=str, default=str(results_dir.parents[0] / "figures"))
    args = parser.parse_args()

    logger = get_logger("calderon.plot_report")
    plt.rcParams["font.size"] = 12
    os.makedirs(args.figures_dir, exist_ok=True)
    trials = pd.read_csv(args.trials_csv)
    for theorem_id in args.experiments or sorted(trials["theorem_id"].unique()):
        path = plot_ratios(trials, theorem_id, args.figures_dir)
        logger.info(f"{theorem_id}: {path or 'no ratio column, skipped'}")
