"""relcast: joint classification of character relationship polarity in narratives.

Documents are signed character graphs; every annotated pair gets a +1
(cooperative) or -1 (adversarial) label.  The structured model scores a
joint labelling from per-pair text features plus the counts of the four
signed-triangle configurations, trains with an averaged structured
perceptron, and optionally gates K cluster-specific models on a document
descriptor.  A per-edge logistic regression baseline and a synthetic-corpus
generator with planted structural regularities round out the toolkit.
"""

from relcast.decode import DecodeConfig, brute_force_oracle, decode, infer_ungrounded
from relcast.features import (
    CueRecord,
    FeatureVocabulary,
    PairCues,
    VocabularyError,
    aggregate_pair_features,
    build_vocabulary,
)
from relcast.graph import (
    AssignmentError,
    Document,
    Edge,
    FlatModel,
    GraphValidationError,
    TriadCensus,
    enumerate_triangles,
    gold_labels,
    joint_features,
    score,
    triad_census,
    triangle_components,
)
from relcast.logreg import LRModel, predict_lr, predict_lr_batch, train_lr
from relcast.metrics import Metrics, evaluate, format_metrics
from relcast.mixture import (
    ClusteredModel,
    MixtureTrainConfig,
    augment_features,
    cluster_losses,
    decode_clustered,
    expected_loss,
    gating_gradient,
    gating_gradients,
    grad_gating,
    membership,
    memberships,
    objective,
    predict_cluster,
    train_mixture,
)
from relcast.perceptron import TrainConfig, hinge_loss, train_spr, train_weighted
from relcast.synth import ClusterProfile, SynthSpec, generate_corpus, gibbs_labels

__version__ = "0.1.0"
