//! K-means clustering baseline.
