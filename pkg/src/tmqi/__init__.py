from .noise_model import CH1, CH2, PRESETS, ChannelParams  # noqa: F401
