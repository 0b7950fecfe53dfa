"""HTTP service wrapping the core pipeline.

Endpoints exchange JSON only: requests carry filesystem paths and settings,
responses carry summaries, records, and leaderboards. Heavy artifacts
(tensors, bundles, feature maps) stay on disk, so a remote client must share
a filesystem view with the server.
"""

from .app import create_app

__all__ = ["create_app"]
