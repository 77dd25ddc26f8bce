"""Heat load pattern discovery for district heating networks.

Pipeline stages, each usable on its own:

* :mod:`heatpatterns.meterdata` - ingestion, jump repair, screening
* :mod:`heatpatterns.profiles` - seasonal 168-hour profiles, z-normalization
* :mod:`heatpatterns.sbd` - shape-based distance (FFT cross-correlation)
* :mod:`heatpatterns.kshape` - k-shape clustering and shape extraction
* :mod:`heatpatterns.anomaly` - mean + 3 sigma abnormal-profile detection
* :mod:`heatpatterns.modelselect` - silhouette validation and k sweeps
* :mod:`heatpatterns.strategy` - control-strategy labels and suitability rules
* :mod:`heatpatterns.pipeline` - end-to-end runs and the artifact store
* :mod:`heatpatterns.synthetic` - planted-archetype test fixtures
* :mod:`heatpatterns.service` - HTTP service for the labeling viewer
"""

__version__ = "0.1.0"
