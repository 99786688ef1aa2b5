"""Multi-agent actor-critic with learned state beliefs and count-based exploration."""

try:
    from . import _smpe
except ImportError:  # build tree: the extension sits next to the package
    import _smpe

ConfigError = _smpe.ConfigError
UsageError = _smpe.UsageError
TrainingFault = _smpe.TrainingFault
Env = _smpe.Env
EnvSpec = _smpe.EnvSpec
SimHash = _smpe.SimHash
intrinsic_reward = _smpe.intrinsic_reward
mix_reward = _smpe.mix_reward
kl_standard_normal = _smpe.kl_standard_normal
config_keys = _smpe.config_keys
build_config = _smpe.build_config
train = _smpe.train
evaluate = _smpe.evaluate
read_metrics = _smpe.read_metrics

__all__ = [
    "ConfigError",
    "UsageError",
    "TrainingFault",
    "Env",
    "EnvSpec",
    "SimHash",
    "intrinsic_reward",
    "mix_reward",
    "kl_standard_normal",
    "config_keys",
    "build_config",
    "train",
    "evaluate",
    "read_metrics",
]
