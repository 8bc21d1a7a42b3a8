"""Cost-minimizing edge resource provisioning across federated infrastructure providers."""

__version__ = "0.1.0"
