from .config import AdapterConfig
from .data import Pair, load_pairs, write_predictions
from .model import Seq2Seq
from .train import finetune, fit, load_checkpoint, predict, pretrain, save_checkpoint
from .vocab import Vocab

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig", "Pair", "Seq2Seq", "Vocab",
    "finetune", "fit", "load_checkpoint", "load_pairs",
    "predict", "pretrain", "save_checkpoint", "write_predictions",
]
