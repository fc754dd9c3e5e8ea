"""Layer-wise multi-view Transformer for sequence transduction, in numpy.

The encoder exposes two views of the source (its top layer and one
intermediate layer); the decoder is trained on both with a KL term tying the
two predictive distributions together, and either view alone serves at
inference time.
"""

from .autograd import Tensor, no_grad, precision
from .bleu import BleuReport, corpus_bleu
from .checkpoint import average_checkpoints, load_checkpoint, save_checkpoint
from .config import RunConfig
from .data import ParallelCorpus, Vocabulary, batch_iterator, gen_toy_corpus, load_parallel_corpus, make_batch
from .decoding import DecodeConfig, beam_search, ensemble_decode, greedy_decode, greedy_decode_batch, token_accuracy
from .errors import (CheckpointError, ConfigError, ConfigMismatchError, EmptyBatchError, IntegrityError,
                     InvalidDistributionError, MVNMTError, NonFiniteLossError, ShapeError)
from .model import (EncoderViews, Model, ModelConfig, NoiseSpec, build_model, decode_single, decode_two_stream,
                    encode_views, strip_to_view)
from .objectives import LossConfig, consistency_kl, multiview_loss, mv_nll
from .training import OptimizerState, TrainConfig, Trainer, lr_at, train_step

__version__ = "0.1.0"
