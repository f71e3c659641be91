import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaleplan.errors import ConfigError
from scaleplan.respool import (
    ReferenceShape,
    ResolutionPool,
    batch_size_for,
    build_pool,
    compress_pool,
)


class TestBuildPool:
    def test_classification_ladder(self):
        pool = build_pool((128, 128), (320, 320), 32)
        assert [h for h, _ in pool.resolutions] == [128, 160, 192, 224, 256, 288, 320]

    def test_efficientnet_ladder_size(self):
        assert len(build_pool((160, 160), (448, 448), 32)) == 10

    def test_detection_ladder_size(self):
        assert len(build_pool((512, 512), (1280, 1280), 32)) == 25

    def test_degenerate_single_entry(self):
        pool = build_pool((224, 224), (224, 224), 32)
        assert pool.resolutions == ((224, 224),)

    def test_square_pool_areas_strictly_increase(self):
        pool = build_pool((64, 64), (512, 512), 32)
        areas = pool.areas
        assert all(b > a for a, b in zip(areas, areas[1:]))

    def test_rectangular_grid(self):
        pool = build_pool((64, 96), (96, 128), 32)
        assert set(pool.resolutions) == {
            (64, 96), (64, 128), (96, 96), (96, 128)
        }
        areas = pool.areas
        assert all(b >= a for a, b in zip(areas, areas[1:]))

    def test_misaligned_bounds_rejected(self):
        with pytest.raises(ConfigError) as err:
            build_pool((100, 100), (320, 320), 32)
        assert err.value.code == "pool.resolutions"

    def test_inverted_bounds_rejected(self):
        with pytest.raises(ConfigError):
            build_pool((320, 320), (128, 128), 32)


class TestResolutionPool:
    def test_sorted_canonical_order(self):
        pool = ResolutionPool(((320, 320), (128, 128), (224, 224)), divisor=32)
        assert pool.resolutions == ((128, 128), (224, 224), (320, 320))

    def test_duplicates_rejected(self):
        with pytest.raises(ConfigError):
            ResolutionPool(((128, 128), (128, 128)), divisor=32)

    def test_divisor_violation_rejected(self):
        with pytest.raises(ConfigError):
            ResolutionPool(((100, 100),), divisor=32)


class TestCompressPool:
    def test_rho_one_is_identity(self):
        pool = build_pool((128, 128), (320, 320), 32)
        assert compress_pool(pool, 1.0) is pool

    def test_classification_at_three_quarters(self):
        pool = build_pool((128, 128), (320, 320), 32)
        out = compress_pool(pool, 0.75)
        assert [h for h, _ in out.resolutions] == [96, 128, 160, 192, 224, 256]

    def test_half_up_rounding(self):
        # 192 * 0.75 / 32 = 4.5 rounds up to 5 cells = 160, not down to 128
        pool = ResolutionPool(((192, 192),), divisor=32)
        assert compress_pool(pool, 0.75).resolutions == ((160, 160),)

    def test_divisor_floor(self):
        pool = ResolutionPool(((64, 64),), divisor=32)
        assert compress_pool(pool, 0.1).resolutions == ((32, 32),)

    def test_detection_minimum(self):
        pool = build_pool((512, 512), (1280, 1280), 32)
        out = compress_pool(pool, 0.75)
        assert out.resolutions[0] == (384, 384)

    def test_collapse_dedupes(self):
        pool = ResolutionPool(((32, 32), (64, 64)), divisor=32)
        out = compress_pool(pool, 0.2)
        assert out.resolutions == ((32, 32),)

    @pytest.mark.parametrize("rho", [0.0, -0.5, 1.01])
    def test_rho_range(self, rho):
        pool = build_pool((128, 128), (320, 320), 32)
        with pytest.raises(ConfigError) as err:
            compress_pool(pool, rho)
        assert err.value.code == "compress.rho"


class TestBatchSizeFor:
    REF = ReferenceShape(256, 3, 224, 224)

    @pytest.mark.parametrize(
        "res,expected",
        [((224, 224), 256), ((160, 160), 501), ((320, 320), 125), ((128, 128), 784)],
    )
    def test_classification_values(self, res, expected):
        assert batch_size_for(self.REF, res) == expected

    def test_floor_to_one(self):
        assert batch_size_for(ReferenceShape(1, 3, 32, 32), (1024, 1024)) == 1

    def test_reference_resolution_is_identity(self):
        assert batch_size_for(self.REF, (224, 224)) == self.REF.batch


class TestReferenceShape:
    def test_budget(self):
        assert ReferenceShape(256, 3, 224, 224).pixel_budget == 256 * 224 * 224

    @pytest.mark.parametrize("field", ["batch", "channels", "height", "width"])
    def test_positive_fields(self, field):
        kwargs = dict(batch=4, channels=3, height=64, width=64)
        kwargs[field] = 0
        with pytest.raises(ConfigError) as err:
            ReferenceShape(**kwargs)
        assert err.value.code == f"reference.{field}"


@given(
    lo_cells=st.integers(1, 12),
    span_cells=st.integers(0, 12),
    divisor=st.sampled_from([8, 32]),
)
@settings(max_examples=100, deadline=None)
def test_build_pool_count_matches_grid(lo_cells, span_cells, divisor):
    lo = lo_cells * divisor
    hi = lo + span_cells * divisor
    pool = build_pool((lo, lo), (hi, hi), divisor)
    assert len(pool) == span_cells + 1
    assert all(h % divisor == 0 and w % divisor == 0 for h, w in pool.resolutions)


@given(
    rho=st.floats(0.05, 1.0),
    lo_cells=st.integers(1, 10),
    span_cells=st.integers(0, 10),
)
@settings(max_examples=100, deadline=None)
def test_compress_bounds_and_alignment(rho, lo_cells, span_cells):
    divisor = 32
    pool = build_pool((lo_cells * divisor,) * 2, ((lo_cells + span_cells) * divisor,) * 2, divisor)
    out = compress_pool(pool, rho)
    assert 1 <= len(out) <= len(pool)
    for (h, w), (h0, w0) in zip(out.resolutions[-1:], pool.resolutions[-1:]):
        assert h <= h0 and w <= w0  # compression never enlarges the top entry
    assert all(h % divisor == 0 and w % divisor == 0 for h, w in out.resolutions)


@given(
    batch=st.integers(1, 1024),
    ref_cells=st.integers(1, 16),
    res_cells=st.integers(1, 16),
)
@settings(max_examples=200, deadline=None)
def test_batch_size_floor_characterization(batch, ref_cells, res_cells):
    """b = batch_size_for(...) is the largest batch within the pixel budget."""
    ref = ReferenceShape(batch, 3, ref_cells * 32, ref_cells * 32)
    res = (res_cells * 32, res_cells * 32)
    b = batch_size_for(ref, res)
    area = res[0] * res[1]
    assert b >= 1
    if b > 1:
        assert b * area <= ref.pixel_budget
    assert (b + 1) * area > ref.pixel_budget or b * area <= ref.pixel_budget < (b + 1) * area or b == 1
    if ref.pixel_budget >= area:
        assert b * area <= ref.pixel_budget < (b + 1) * area
