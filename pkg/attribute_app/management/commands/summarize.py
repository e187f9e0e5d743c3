from django.conf import settings

from attribute_app import csvio
from attribute_app.serializers import SummarizeConfigSerializer
from attribute_app.summarize import SUMMARY_METHODS, \
    coverage_diversity_report, summarize_dataset
from attribute_app.utils import RunCommand


class Command(RunCommand):
    help = 'Pick the k most informative frames of every sequence (MMI-1).'
    config_serializer = SummarizeConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('features', nargs='?', default=None)
        parser.add_argument('--k', type=int, default=None,
                            help=f"frames per summary (default "
                                 f"{settings.MMIDICT['SUMMARY_K']})")
        parser.add_argument('--method', choices=SUMMARY_METHODS,
                            default=None,
                            help='mmi1 (default), or the me / kmeans baseline')
        parser.add_argument('--blocks', type=int, nargs='+', default=None,
                            help='row counts of feature blocks to normalize '
                                 'separately and stack')
        parser.add_argument('--raw', dest='normalize', action='store_false',
                            default=None,
                            help='skip frame L2 normalization')
        parser.add_argument('--out', default=None)

    def run(self, config, n_jobs):
        mm = settings.MMIDICT
        dataset = csvio.read_features(config['features'])
        summaries = summarize_dataset(dataset, config['k'],
                                      method=config['method'],
                                      normalize=config['normalize'],
                                      blocks=config['blocks'],
                                      seed=config['seed'],
                                      max_iter=mm['KMEANS_MAX_ITER'],
                                      tol=mm['KMEANS_TOL'],
                                      n_jobs=n_jobs)
        csvio.write_summaries(summaries, dataset, config['out'])
        for summary in summaries:
            diversity, coverage = coverage_diversity_report(
                summary, dataset.get(summary.sequence_id).frames.T)
            self.stdout.write(
                f"{summary.sequence_id}: frames {list(summary.frames)} "
                f"diversity {diversity:.4f} coverage {coverage:.4f}")
