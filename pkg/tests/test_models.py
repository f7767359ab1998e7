"""Testes para o extrator de características e as cabeças."""

import numpy as np

from sensorscan.models import (
    Classifier,
    SequentialPooling,
    build_cluster_head,
    build_feature_extractor,
    build_pretrain_network,
    count_parameters,
)
from sensorscan.schemas.model import ModelConfig

from tests.utils import check_module, near_kink


def test_parameter_counts_match_configuration(tiny_model_cfg: ModelConfig):
    """Testa a contagem analítica de parâmetros contra os módulos construídos."""
    counts = count_parameters(tiny_model_cfg)
    network = build_pretrain_network(tiny_model_cfg, seed=0)
    head = build_cluster_head(tiny_model_cfg, seed=0)

    assert network.extractor.encoder.num_parameters() == counts["encoder"]
    assert network.extractor.pooling.num_parameters() == counts["pooling"]
    assert network.extractor.projection.num_parameters() == counts["projection"]
    assert network.reconstruction.num_parameters() == counts["reconstruction"]
    assert head.num_parameters() == counts["cluster_head"]


def test_output_shapes(tiny_model_cfg: ModelConfig, rng: np.random.Generator):
    """Testa as formas de reconstrução, embeddings e probabilidades."""
    network = build_pretrain_network(tiny_model_cfg, seed=0)
    x = rng.normal(size=(5, 8, 3))
    reconstruction, embeddings = network(x)
    assert reconstruction.shape == (5, 8, 3)
    assert embeddings.shape == (5, 4)

    head = build_cluster_head(tiny_model_cfg, seed=0)
    probs = head(embeddings)
    assert probs.shape == (5, 3)
    assert np.all(probs >= 0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_pooling_weights_sum_to_one(rng: np.random.Generator):
    """Testa que os pesos do pooling sequencial formam uma distribuição."""
    pooling = SequentialPooling(6, rng)
    pooled = pooling(rng.normal(size=(4, 7, 6)))
    assert pooled.shape == (4, 6)
    np.testing.assert_allclose(pooling.pool_weights.sum(axis=1), 1.0, atol=1e-12)


def test_pooling_of_constant_sequence_returns_the_vector(rng: np.random.Generator):
    """Testa que uma sequência constante é devolvida pelo pooling."""
    pooling = SequentialPooling(5, rng)
    vector = rng.normal(size=5)
    np.testing.assert_allclose(pooling(np.tile(vector, (9, 1))), vector, atol=1e-12)


def test_pooling_gradients(rng: np.random.Generator):
    """Testa o backward do pooling sequencial."""
    pooling = SequentialPooling(4, rng)
    assert check_module(pooling, rng.normal(size=(2, 5, 4)), rng) < 1e-5


def test_cluster_head_gradients(tiny_model_cfg: ModelConfig):
    """Testa o backward da cabeça de clustering em modo treino."""
    checked = 0
    for seed in range(30):
        rng = np.random.default_rng(seed)
        head = build_cluster_head(tiny_model_cfg, seed=seed)
        z = rng.normal(size=(6, 4))
        head(z)
        if near_kink(head):
            continue
        assert check_module(head, z, rng) < 1e-5
        checked += 1
    assert checked >= 5


def test_feature_extractor_end_to_end_gradients(tiny_model_cfg: ModelConfig):
    """Testa o backward de encoder + pooling + projeção com um encoder de uma camada."""
    checked = 0
    for seed in range(40):
        rng = np.random.default_rng(seed)
        extractor = build_feature_extractor(tiny_model_cfg, seed=seed)
        x = rng.normal(size=(3, 4, 3))
        extractor(x)
        if near_kink(extractor):
            continue
        assert check_module(extractor, x, rng) < 1e-5
        checked += 1
        if checked == 6:
            break
    assert checked >= 5


def test_extractor_is_deterministic_in_eval_mode(
    tiny_model_cfg: ModelConfig, rng: np.random.Generator
):
    """Testa que embed é determinístico com dropout ativo na configuração."""
    cfg = tiny_model_cfg.model_copy(update={"dropout": 0.3})
    extractor = build_feature_extractor(cfg, seed=0)
    x = rng.normal(size=(6, 8, 3))
    np.testing.assert_array_equal(extractor.embed(x), extractor.embed(x))


def test_positional_encoding_breaks_time_permutation(
    tiny_model_cfg: ModelConfig, rng: np.random.Generator
):
    """Testa que reverter o tempo altera a embedding (o encoding posicional quebra a simetria)."""
    extractor = build_feature_extractor(tiny_model_cfg, seed=0)
    x = rng.normal(size=(2, 8, 3))
    assert not np.allclose(extractor.embed(x), extractor.embed(x[:, ::-1, :]))


def test_same_seed_builds_identical_networks(tiny_model_cfg: ModelConfig):
    """Testa a inicialização determinística por seed."""
    first = dict(build_pretrain_network(tiny_model_cfg, seed=3).named_parameters())
    second = dict(build_pretrain_network(tiny_model_cfg, seed=3).named_parameters())
    other = dict(build_pretrain_network(tiny_model_cfg, seed=4).named_parameters())
    assert first.keys() == second.keys()
    for name in first:
        np.testing.assert_array_equal(first[name].value, second[name].value)
    assert any(not np.array_equal(first[n].value, other[n].value) for n in first)


def test_classifier_predicts_argmax(tiny_model_cfg: ModelConfig, rng: np.random.Generator):
    """Testa que predict é o argmax de predict_proba."""
    classifier = Classifier(
        build_feature_extractor(tiny_model_cfg, seed=0), build_cluster_head(tiny_model_cfg, 0)
    )
    x = rng.normal(size=(7, 8, 3))
    probs = classifier.predict_proba(x)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_array_equal(classifier.predict(x), np.argmax(probs, axis=1))
