from .losses import contrastive_loss, mse_regression_loss, combined_loss
from .optim import AdamW, adamw_step
from .trainer import TrainConfig, TrainLog, Trainer, pretrain_victim, \
    train_attacker, normalize_rows, default_victim_train_config
