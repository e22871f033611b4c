"""Static SVG bar chart of per-vessel boundary flows."""
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from coarcta.domain import BOUNDARY_VESSELS  # noqa: E402

LABELS = ("inlet", "outlet 1", "outlet 2", "outlet 3", "outlet 4")


def bar_chart_svg(bc_sets):
    """Grouped bars: one group per boundary vessel, one bar per provenance."""
    names = [s.provenance for s in bc_sets]
    x = np.arange(len(BOUNDARY_VESSELS))
    width = 0.8 / max(len(bc_sets), 1)
    with plt.rc_context({"svg.hashsalt": "coarcta", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for i, s in enumerate(bc_sets):
            flows = s.reference_flows or s.numeric_values()
            ax.bar(x + (i - (len(bc_sets) - 1) / 2) * width,
                   [flows.get(v, np.nan) for v in BOUNDARY_VESSELS], width, label=names[i])
        ax.set_xticks(x, LABELS)
        ax.set_ylabel("mass flow rate [kg/s]")
        ax.legend(fontsize="small")
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
