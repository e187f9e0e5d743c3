import logging

from attribute_app import csvio
from attribute_app.labeldist import atom_class_dist
from attribute_app.numcore import flatten
from attribute_app.pursuit import omp_encode
from attribute_app.recognize import compactness_histogram, mass_at_least, \
    purity_histogram, sequence_reconstruction
from attribute_app.serializers import EvalConfigSerializer
from attribute_app.utils import RunCommand

logger = logging.getLogger(__name__)


class Command(RunCommand):
    help = ('Dictionary diagnostics: compactness histogram (written to '
            '--out), purity histogram and per-sequence reconstruction error.')
    config_serializer = EvalConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('dictionary', nargs='?', default=None)
        parser.add_argument('codes', nargs='?', default=None)
        parser.add_argument('features', nargs='?', default=None)
        parser.add_argument('--agg', dest='aggregation', default=None)
        parser.add_argument('--bins', type=int, default=None)
        parser.add_argument('--sparsity', type=int, default=None,
                            help='encode the features at this sparsity '
                                 'for purity and reconstruction')
        parser.add_argument('--out', default=None)

    def class_distributions(self, config, dictionary, dataset, n_jobs):
        if config['codes'] is not None:
            dataset.require_labels()
            codes = csvio.read_codes(config['codes'], dataset, dictionary.K)
        elif dictionary.class_dist is not None:
            return dictionary.class_dist
        elif dataset is not None and config['sparsity'] is not None \
                and dataset.is_labeled:
            dataset.require_labels()
            Y, _, _ = flatten(dataset)
            codes = omp_encode(dictionary, Y, config['sparsity'],
                               n_jobs=n_jobs)
        else:
            return None
        _, labels, _ = flatten(dataset)
        return atom_class_dist(codes, labels, dataset.n_classes,
                               config['aggregation'])

    def run(self, config, n_jobs):
        dictionary = csvio.read_dictionary(config['dictionary'])
        dataset = None
        if config['features'] is not None:
            dataset = csvio.read_features(config['features'])
        out, bins = config['out'], config['bins']

        edges, frequency = compactness_histogram(dictionary, bins)
        csvio.write_histogram(edges, frequency, out)
        self.stdout.write(
            f"compactness: {mass_at_least(edges, frequency, 0.8):.4f} of "
            f"atom pairs at similarity >= 0.8")

        dists = self.class_distributions(config, dictionary, dataset, n_jobs)
        if dists is None:
            logger.warning("no class distributions available; "
                           "purity histogram skipped")
        else:
            edges, frequency = purity_histogram(dists, bins)
            csvio.write_histogram(edges, frequency,
                                  csvio.sidecar(out, 'purity'))
            self.stdout.write(
                f"purity: {mass_at_least(edges, frequency, 0.6):.4f} of "
                f"atoms with max class probability >= 0.6")

        if dataset is not None and config['sparsity'] is not None:
            rows = sequence_reconstruction(dictionary, dataset,
                                           config['sparsity'], n_jobs=n_jobs)
            csvio.write_reconstruction(rows,
                                       csvio.sidecar(out, 'reconstruction'))
            self.stdout.write(f"reconstruction rmse written for {len(rows)} "
                              "sequences")
