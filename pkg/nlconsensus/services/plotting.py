from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from nlconsensus.core.logger import logger  # noqa: E402
from nlconsensus.models.state import Trajectory  # noqa: E402

# Stable element ids across runs
matplotlib.rcParams["svg.hashsalt"] = "nlconsensus"


class PlottingService:
    """Static SVG figures of agent trajectories."""

    def plot_trajectory(self, traj: Trajectory, path: Path, title: Optional[str] = None) -> Path:
        fig, (ax_x, ax_d) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
        for i in range(traj.n):
            ax_x.plot(traj.times, traj.states[:, i], label=f"x_{i + 1}")
        if traj.decision_value is not None:
            ax_x.axhline(traj.decision_value, color="gray", linestyle="--", linewidth=0.8, label="decision")
        ax_x.set_ylabel("agent state")
        ax_x.set_title(title or f"{traj.protocol_label}: {traj.terminated_by}")
        ax_x.legend()
        ax_x.grid(True)

        positive = traj.disagreement > 0
        ax_d.semilogy(traj.times[positive], traj.disagreement[positive])
        ax_d.set_xlabel("t")
        ax_d.set_ylabel("max x - min x")
        ax_d.grid(True)

        return self._save(fig, path)

    def plot_comparison(self, traj_a: Trajectory, traj_b: Trajectory, path: Path) -> Path:
        """Both runs on one axis; the first is drawn with star markers."""
        fig, ax = plt.subplots(figsize=(8, 5))
        every_a = max(1, len(traj_a) // 25)
        for i in range(traj_a.n):
            color = f"C{i}"
            ax.plot(
                traj_a.times, traj_a.states[:, i], color=color, marker="*", markevery=every_a,
                label=f"x_{i + 1} ({traj_a.protocol_label})",
            )
            ax.plot(
                traj_b.times, traj_b.states[:, i], color=color, linestyle="--",
                label=f"x_{i + 1} ({traj_b.protocol_label})",
            )
        ax.set_xlabel("t")
        ax.set_ylabel("agent state")
        ax.set_title(f"{traj_a.protocol_label} vs {traj_b.protocol_label}")
        ax.legend(fontsize="small")
        ax.grid(True)
        return self._save(fig, path)

    def _save(self, fig, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Plot written to {path}")
        return path


plotting_service = PlottingService()
