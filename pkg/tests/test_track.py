import numpy as np
import pytest

from raceline.errors import ConfigError
from raceline.track import (
    BUILTIN_TRACKS,
    TrackDefinition,
    cast_rays,
    format_track,
    inside_track,
    load_track,
    parse_track,
    project,
    resolve_track,
)

from helpers import GridInsideTester, march_ray


def rectangle_track(name="rect", half_width=6.0, length=400.0, height=200.0):
    pts = np.array([(0.0, 0.0), (length, 0.0), (length, height), (0.0, height)])
    return TrackDefinition(name, half_width, pts)


class TestValidation:
    def test_builtins_load_and_are_closed_loops(self):
        for name in BUILTIN_TRACKS:
            track = resolve_track(name)
            assert track.name == name
            assert track.total_length > 0
            assert np.all(np.diff(np.append(track.cum_len, track.total_length)) > 0)

    def test_too_few_points_rejected(self):
        with pytest.raises(ConfigError):
            TrackDefinition("bad", 1.0, np.array([(0.0, 0.0), (1.0, 0.0)]))

    def test_repeated_first_point_rejected(self):
        pts = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)])
        with pytest.raises(ConfigError, match="implicit"):
            TrackDefinition("bad", 0.1, pts)

    def test_zero_length_segment_rejected(self):
        pts = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
        with pytest.raises(ConfigError, match="zero-length"):
            TrackDefinition("bad", 0.1, pts)

    def test_non_positive_half_width_rejected(self):
        pts = np.array([(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)])
        with pytest.raises(ConfigError):
            TrackDefinition("bad", 0.0, pts)

    def test_half_width_beyond_turn_radius_rejected(self):
        # a 20 m wide band around a loop that is only ~8 m across
        phi = 2.0 * np.pi * np.arange(24) / 24
        pts = np.stack([4.0 * np.cos(phi), 4.0 * np.sin(phi)], axis=1)
        with pytest.raises(ConfigError):
            TrackDefinition("bad", 10.0, pts)


class TestQueries:
    def test_projection_on_known_straight(self):
        track = rectangle_track()
        arc, lat, tangent = project(track, np.array([50.0, 3.0]))
        assert arc == pytest.approx(50.0)
        assert lat == pytest.approx(3.0)      # left of +x travel
        assert tangent == pytest.approx(0.0)
        _, lat_right, _ = project(track, np.array([50.0, -2.0]))
        assert lat_right == pytest.approx(-2.0)

    def test_arc_wraps_around_the_loop(self):
        track = rectangle_track()
        arc, _, _ = project(track, np.array([0.0, 1e-6]))
        assert 0.0 <= arc < track.total_length

    def test_inside_band_only(self):
        track = rectangle_track()
        assert inside_track(track, np.array([50.0, 0.0]))
        assert inside_track(track, np.array([50.0, 5.9]))
        assert not inside_track(track, np.array([50.0, 6.1]))       # past the edge
        assert not inside_track(track, np.array([200.0, 100.0]))    # in the hole
        batch = np.array([[50.0, 0.0], [50.0, 6.1], [200.0, 100.0]])
        np.testing.assert_array_equal(inside_track(track, batch),
                                      [True, False, False])

    def test_perpendicular_rays_read_half_width(self):
        track = rectangle_track(half_width=5.0)
        dists = cast_rays(track, np.array([50.0, 0.0]),
                          np.array([np.pi / 2, -np.pi / 2]))
        np.testing.assert_allclose(dists, [5.0, 5.0], atol=1e-12)

    def test_long_ray_hits_the_range_cap(self):
        track = resolve_track("straight")
        dist = cast_rays(track, track.centerline[0], np.array([0.0]))
        assert dist[0] == 200.0

    def test_rays_agree_with_marching_oracle_sample(self):
        track = resolve_track("oval")
        tester = GridInsideTester(track)
        rng = np.random.default_rng(42)
        for _ in range(12):
            arc = rng.uniform(0, track.total_length)
            base = track.centerline_point(arc)
            _, _, tangent = project(track, base)
            normal = np.array([-np.sin(tangent), np.cos(tangent)])
            origin = base + rng.uniform(-0.8, 0.8) * track.half_width * normal
            angle = rng.uniform(-np.pi, np.pi)
            analytic = cast_rays(track, origin, np.array([angle]))[0]
            marched = march_ray(tester, origin, angle)
            assert abs(analytic - marched) <= 1e-3


class TestFileFormat:
    def test_round_trip_preserves_geometry(self, tmp_path):
        track = rectangle_track("roundtrip")
        path = tmp_path / "roundtrip.track"
        path.write_text(format_track(track))
        loaded = load_track(path)
        assert loaded.name == "roundtrip"
        assert loaded.half_width == track.half_width
        np.testing.assert_array_equal(loaded.centerline, track.centerline)

    def test_comments_and_blank_lines_ignored(self):
        text = """# corridor fixture
        demo   # name
        2.5
        0 0
        10 0   # far corner

        10 8
        0 8
        """
        track = parse_track(text)
        assert track.name == "demo"
        assert track.half_width == 2.5
        assert len(track.centerline) == 4

    def test_missing_half_width_reported(self):
        with pytest.raises(ConfigError, match="half width"):
            parse_track("onlyname\n")

    def test_bad_coordinate_reported_with_line(self):
        with pytest.raises(ConfigError, match=":4"):
            parse_track("demo\n1.0\n0 0\n1 oops\n2 2\n")

    def test_unknown_name_lists_builtins(self):
        with pytest.raises(ConfigError, match="straight"):
            resolve_track("no-such-track")

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_track(tmp_path / "absent.track")
