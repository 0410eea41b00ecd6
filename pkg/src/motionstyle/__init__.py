"""motionstyle: generative human-motion stylization in a learned latent space.

A motion autoencoder (codec) maps pose-feature sequences to temporally
compressed latent codes; a stylization model disentangles those codes into
deterministic content and a probabilistic style space, and regenerates codes
via adaptive instance normalization. A separate global-motion predictor
recovers root trajectories for the stylized result.
"""

__version__ = "0.1.0"
