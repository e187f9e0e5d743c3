import numpy as np
from django.test import SimpleTestCase

from attribute_app import summarize
from attribute_app.exceptions import InputError
from attribute_app.numcore import FeatureDataset, FeatureSequence, \
    l2_normalize_columns, make_rng
from attribute_app.summarize import Summary
from attribute_app.synthetic import clustered_frames


class SummarizeSequenceTestCase(SimpleTestCase):
    def test_outlier_frame_is_kept(self):
        frames = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        summary = summarize.summarize_sequence(frames, 2)
        self.assertIn(2, summary.frames)
        self.assertEqual(len(set(summary.frames) & {0, 1}), 1)
        self.assertEqual(summary.frames, tuple(sorted(summary.order)))

    def test_k_must_leave_a_frame_out(self):
        with self.assertRaises(InputError):
            summarize.summarize_sequence(np.eye(3), 3)
        with self.assertRaises(InputError):
            summarize.summarize_sequence(np.eye(3), 0)

    def test_one_frame_per_cluster(self):
        frames, assignment = clustered_frames(clusters=5, per_cluster=6,
                                              seed=2)
        summary = summarize.summarize_sequence(frames, 5)
        self.assertEqual(len(set(assignment[list(summary.frames)])), 5)

    def test_scale_does_not_matter_when_normalized(self):
        frames = np.abs(make_rng(3).standard_normal((10, 12)))
        first = summarize.summarize_sequence(frames, 4)
        scaled = summarize.summarize_sequence(frames * 4.0, 4)
        self.assertEqual(first.frames, scaled.frames)

    def test_terms_are_recorded_per_step(self):
        frames = np.abs(make_rng(4).standard_normal((8, 10)))
        summary = summarize.summarize_sequence(frames, 3, sequence_id='s')
        self.assertEqual(summary.sequence_id, 's')
        self.assertEqual(len(summary.diversity), 3)
        self.assertEqual(len(summary.coverage), 3)
        self.assertGreater(summary.mutual_information, 0.0)

    def test_compact_matches_dense(self):
        frames, _ = clustered_frames(clusters=4, per_cluster=5, seed=5)
        dense = summarize.summarize_sequence(frames, 4)
        compact = summarize.summarize_sequence(frames, 4, compact=True,
                                               tau=0.0)
        self.assertEqual(dense.order, compact.order)

    def test_identical_frames_keep_their_order(self):
        for F in (4, 6, 10, 20):
            summary = summarize.summarize_sequence(np.ones((5, F)), 3)
            self.assertEqual(summary.frames, (0, 1, 2), F)
            self.assertEqual(summary.order, (0, 1, 2), F)

    def test_unknown_method(self):
        with self.assertRaisesMessage(InputError, 'unknown summary method'):
            summarize.summarize_sequence(np.eye(3), 1, method='random')

    def test_me_summary_has_no_coverage_terms(self):
        frames = np.abs(make_rng(8).standard_normal((8, 10)))
        summary = summarize.summarize_sequence(frames, 3, method='me')
        self.assertEqual(len(summary.frames), 3)
        self.assertEqual(len(summary.diversity), 3)
        self.assertEqual(summary.coverage, ())

    def test_kmeans_picks_a_member_of_every_cluster(self):
        frames, assignment = clustered_frames(clusters=4, per_cluster=5,
                                              seed=9)
        summary = summarize.summarize_sequence(frames, 4, method='kmeans')
        self.assertEqual(len(summary.frames), 4)
        self.assertEqual((summary.diversity, summary.coverage), ((), ()))
        self.assertEqual(len(set(assignment[list(summary.frames)])), 4)


class BaselineCoverageTestCase(SimpleTestCase):
    def planted(self, trial):
        frames, assignment = clustered_frames(n=64, clusters=5, per_cluster=6,
                                              seed=100 + trial)
        outliers, _ = l2_normalize_columns(
            make_rng(200 + trial).standard_normal((64, 5)))
        return (np.hstack([frames, outliers]),
                np.concatenate([assignment, np.full(5, -1)]))

    def test_mmi1_covers_at_least_as_many_clusters(self):
        totals = dict.fromkeys(summarize.SUMMARY_METHODS, 0)
        for trial in range(20):
            frames, assignment = self.planted(trial)
            covered = {}
            for method in summarize.SUMMARY_METHODS:
                summary = summarize.summarize_sequence(
                    frames, 5, method=method, seed=trial)
                hit = set(assignment[list(summary.frames)]) - {-1}
                covered[method] = len(hit)
                totals[method] += len(hit)
            self.assertEqual(covered['mmi1'], 5, trial)
            self.assertGreaterEqual(covered['mmi1'], covered['me'], trial)
            self.assertGreaterEqual(covered['mmi1'], covered['kmeans'], trial)
        self.assertLess(totals['me'], totals['mmi1'])


class ReportTestCase(SimpleTestCase):
    def test_summary_of_every_frame_covers_everything(self):
        frames = make_rng(6).standard_normal((3, 5))
        summary = Summary('s', tuple(range(5)), tuple(range(5)), (), ())
        _, coverage = summarize.coverage_diversity_report(summary, frames)
        self.assertEqual(coverage, 0.0)

    def test_single_frame_summary(self):
        frames = np.array([[0.0, 0.0, 10.0, 10.0], [0.0, 0.0, 0.0, 0.0]])
        summary = Summary('s', (0,), (0,), (0.0,), (0.0,))
        diversity, coverage = summarize.coverage_diversity_report(summary,
                                                                  frames)
        self.assertEqual(diversity, 0.0)
        self.assertEqual(coverage, 5.0)


class SummarizeDatasetTestCase(SimpleTestCase):
    def setUp(self):
        rng = make_rng(7)
        self.dataset = FeatureDataset(tuple(
            FeatureSequence(f's{i}', np.abs(rng.standard_normal((6, 4))))
            for i in range(3)))

    def test_one_summary_per_sequence(self):
        summaries = summarize.summarize_dataset(self.dataset, 2, n_jobs=2)
        self.assertEqual([s.sequence_id for s in summaries],
                         ['s0', 's1', 's2'])
        self.assertTrue(all(len(s.frames) == 2 for s in summaries))

    def test_short_sequence(self):
        with self.assertRaisesMessage(InputError, 's0'):
            summarize.summarize_dataset(self.dataset, 6)

    def test_empty_dataset(self):
        with self.assertRaisesMessage(InputError, 'no sequences'):
            summarize.summarize_dataset(FeatureDataset(()), 1)

    def test_concatenate_features(self):
        blocks = [np.array([[3.0, 0.0]]), np.array([[4.0, 2.0]])]
        fused = summarize.concatenate_features(blocks)
        self.assertEqual(fused.shape, (2, 2))
        # each block is normalized on its own
        self.assertTrue(np.allclose(fused, [[1.0, 0.0], [1.0, 1.0]]))
        with self.assertRaises(InputError):
            summarize.concatenate_features([np.ones((1, 2)), np.ones((1, 3))])

    def test_feature_blocks_are_normalized_apart(self):
        fused = summarize.summarize_dataset(self.dataset, 2, blocks=[1, 3])
        for seq, summary in zip(self.dataset, fused):
            frames = seq.frames.T
            expected = summarize.summarize_sequence(
                summarize.concatenate_features([frames[:1], frames[1:]]), 2)
            self.assertEqual(summary.order, expected.order)

    def test_feature_blocks_must_cover_every_row(self):
        with self.assertRaisesMessage(InputError, 'do not add up to n=4'):
            summarize.summarize_dataset(self.dataset, 2, blocks=[1, 2])
