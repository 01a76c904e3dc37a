"""Learning agents: Q-Learning, QLD and the QRE solver."""
