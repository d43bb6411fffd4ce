import gausschan as gc
import pytest


def channel_grid() -> list[gc.ChannelParams]:
    """Fifteen channels spanning the four constructor families."""
    return [
        gc.make_thermal(1.0, 5.0),
        gc.make_thermal(0.5, 1.0),
        gc.make_thermal(0.7, 0.0),
        gc.make_thermal(0.9, 2.0),
        gc.make_thermal(0.3, 0.5),
        gc.make_additive(0.0),
        gc.make_additive(1.0),
        gc.make_additive(0.25),
        gc.make_additive(2.5),
        gc.make_amplifier(1.0, 3.0),
        gc.make_amplifier(2.0, 0.0),
        gc.make_amplifier(2.0, 1.0),
        gc.make_amplifier(3.0, 2.5),
        gc.make_loss(0.7),
        gc.make_loss(0.25),
    ]


@pytest.fixture
def channels():
    return channel_grid()
