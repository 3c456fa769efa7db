//! Trainable classifiers.
