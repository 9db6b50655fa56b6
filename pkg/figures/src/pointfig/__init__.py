"""Publication figures from pointjump CSV artifacts.

Pure presentation: every number drawn comes out of a CSV (plus its JSON
sidecar for fit annotations), and a digest of the consumed values is
stamped into the PNG so a figure can always be traced back to its data.
"""

from .render import (PlotJob, SchemaMismatch, build_figure, payload_digest,
                     png_text_chunks, render)

__version__ = "0.1.0"
__all__ = ["PlotJob", "SchemaMismatch", "build_figure", "payload_digest",
           "png_text_chunks", "render", "__version__"]
