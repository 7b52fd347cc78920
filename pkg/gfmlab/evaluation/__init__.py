from .metrics import zero_shot_predict, predict_many, accuracy, fidelity, \
    PredictionSet
from .lemma import lemma1_bound, lemma1_verify, lemma1_verify_embeddings, \
    LemmaDiagnostics
from .report import ScenarioReport, Evaluator, evaluate_pair
