import pytest

from shapesearch.config import (
    SensitivityConfig,
    Weights,
    config_text,
    parse_config_text,
)
from shapesearch.errors import ParseError


class TestWeights:
    def test_defaults_sum_to_one(self):
        w = Weights()
        assert abs(sum(w.as_dict().values()) - 1.0) < 1e-12
        assert (w.spatial, w.shape) == (0.30, 0.30)
        assert (w.color, w.rotation, w.scale, w.texture) == (0.11, 0.11, 0.11, 0.07)

    def test_bad_sum_rejected(self):
        with pytest.raises(ValueError):
            Weights(spatial=0.5, shape=0.5, color=0.5, rotation=0.0, scale=0.0, texture=0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            Weights(spatial=-0.1, shape=0.4, color=0.2, rotation=0.2, scale=0.2, texture=0.1)


class TestSensitivityConfig:
    def test_defaults_match_reference_table(self):
        cfg = SensitivityConfig()
        assert cfg.sensitivities["spatial"] == (90.0, 0.40)
        assert cfg.sensitivities["shape"] == (0.005, 0.20)
        assert cfg.sensitivities["color"] == (110.0, 0.40)
        assert cfg.sensitivities["rotation"] == (90.0, 0.40)
        assert cfg.sensitivities["scale"] == (0.50, 0.40)
        assert cfg.sensitivities["texture"] == (110.0, 0.40)
        assert cfg.fourier_descriptors_threshold == 0.98
        assert cfg.circular_symmetry_threshold == 0.99
        assert cfg.spatial_similarity_threshold == 0.30
        assert cfg.symmetry_maxima_threshold == 0.10
        assert cfg.global_similarity_threshold == 0.70

    def test_bad_sensitivities_rejected(self):
        with pytest.raises(ValueError):
            SensitivityConfig(sensitivities={**SensitivityConfig().sensitivities, "shape": (0.0, 0.2)})
        with pytest.raises(ValueError):
            SensitivityConfig(global_similarity_threshold=1.5)


class TestConfigFile:
    def test_round_trip(self):
        weights, cfg = Weights(), SensitivityConfig()
        text = config_text(weights, cfg)
        w2, c2 = parse_config_text(text)
        assert w2 == weights
        assert c2.sensitivities == cfg.sensitivities
        assert c2.global_similarity_threshold == cfg.global_similarity_threshold

    def test_partial_override_keeps_defaults(self):
        w, c = parse_config_text("global_similarity_threshold = 0.5\nshape_similarity_sensitivity_fx = 0.01\n")
        assert c.global_similarity_threshold == 0.5
        assert c.sensitivities["shape"] == (0.01, 0.20)
        assert w == Weights()

    def test_comments_and_blank_lines(self):
        _, c = parse_config_text("# comment\n\nspatial_similarity_threshold = 0.2  # inline\n")
        assert c.spatial_similarity_threshold == 0.2

    def test_unknown_key_rejected(self):
        with pytest.raises(ParseError):
            parse_config_text("no_such_key = 1\n")

    def test_non_numeric_rejected(self):
        with pytest.raises(ParseError):
            parse_config_text("global_similarity_threshold = high\n")

    def test_invalid_weights_rejected(self):
        with pytest.raises(ParseError):
            parse_config_text("spatial_similarity_weight = 0.9\n")
