import logging

import numpy as np
from django.conf import settings

from attribute_app import csvio, gp, selection
from attribute_app.exceptions import InputError
from attribute_app.labeldist import atom_class_dist, atom_prior
from attribute_app.numcore import flatten
from attribute_app.pursuit import Dictionary, omp_encode
from attribute_app.serializers import SelectConfigSerializer
from attribute_app.utils import RunCommand

logger = logging.getLogger(__name__)


class Command(RunCommand):
    help = ('Compress a dictionary to k atoms with ME, MMI-1, MMI-2, MMI-3 '
            'or k-means. Writes the compressed dictionary and a trace.')
    config_serializer = SelectConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('dictionary', nargs='?', default=None)
        parser.add_argument('codes', nargs='?', default=None)
        parser.add_argument('features', nargs='?', default=None,
                            help='feature file the codes encode (labels)')
        parser.add_argument('--method', default=None)
        parser.add_argument('--k', type=int, default=None)
        parser.add_argument('--lambda', dest='lam', type=float, default=None,
                            help='mmi2 trade-off; estimated when omitted')
        parser.add_argument('--min-gain', dest='min_gain', type=float,
                            default=None)
        parser.add_argument('--tau', type=float, default=None)
        parser.add_argument('--jitter', type=float, default=None)
        parser.add_argument('--variance-floor', dest='variance_floor',
                            type=float, default=None)
        parser.add_argument('--dense', action='store_true', default=None,
                            help='evaluate without the compact support')
        parser.add_argument('--agg', dest='aggregation', default=None)
        parser.add_argument('--prior', default=None)
        parser.add_argument('--dump-kernel', dest='dump_kernel',
                            action='store_true', default=None)
        parser.add_argument('--out', default=None)

    def run(self, config, n_jobs):
        method, k = config['method'], config['k']
        dictionary = csvio.read_dictionary(config['dictionary'],
                                           with_sidecars=False)
        dataset = csvio.read_features(config['features'])
        if dataset.n != dictionary.n:
            raise InputError(
                f"feature dimension {dataset.n} does not match dictionary "
                f"dimension {dictionary.n}")
        codes = csvio.read_codes(config['codes'], dataset, dictionary.K)
        Y, labels, _ = flatten(dataset)

        dists = priors = None
        if method in ('mmi2', 'mmi3'):
            dataset.require_labels()
        if dataset.is_labeled:
            dists = atom_class_dist(codes, labels, dataset.n_classes,
                                    config['aggregation'])
            priors = atom_prior(codes, config['prior'])

        out = config['out']
        if method == 'mmi3':
            result, merges = selection.select_mmi3(dictionary, dists, priors,
                                                   k)
            csvio.write_merges(merges, csvio.sidecar(out, 'trace'))
            self.stdout.write(
                f"mmi3: {dictionary.K} -> {result.K} atoms, total loss "
                f"{sum(m.loss for m in merges):.6g}")
        elif method == 'kmeans':
            mm = settings.MMIDICT
            result = selection.select_kmeans(
                dictionary, k, config['seed'], max_iter=mm['KMEANS_MAX_ITER'],
                tol=mm['KMEANS_TOL'])
            if dists is not None:
                recoded = omp_encode(result, Y, min(codes.sparsity, k),
                                     n_jobs=n_jobs)
                result = result.with_class_dist(
                    atom_class_dist(recoded, labels, dataset.n_classes,
                                    config['aggregation']),
                    atom_prior(recoded, config['prior']))
            self.stdout.write(f"kmeans: {dictionary.K} -> {result.K} atoms")
        else:
            kern = gp.kernel_from_codes(codes, tau=config['tau'],
                                        jitter=config['jitter'],
                                        floor=config['variance_floor'])
            logger.info("kernel support density %.4f", kern.density)
            if config['dump_kernel']:
                csvio.write_kernel(kern, csvio.sidecar(out, 'kernel'))
            compact = not config['dense']
            if method == 'me':
                trace = selection.select_me(kern, k, compact=compact,
                                            n_jobs=n_jobs)
            elif method == 'mmi1':
                trace = selection.select_mmi1(
                    kern, k, compact=compact, min_gain=config['min_gain'],
                    n_jobs=n_jobs)
            else:
                trace = selection.select_mmi2(
                    kern, dists, k, config['lam'], compact=compact,
                    min_gain=config['min_gain'], n_jobs=n_jobs)
            result = _subset(dictionary, trace.atoms, dists, priors)
            csvio.write_trace(trace, csvio.sidecar(out, 'trace'))
            lam = '' if trace.lam is None else f" (lambda {trace.lam:.6g})"
            self.stdout.write(
                f"{method}: selected {len(trace)} of {dictionary.K} atoms"
                f"{lam}")
        csvio.write_dictionary(result, out)


def _subset(dictionary, atoms, dists, priors):
    atoms = list(atoms)
    class_dist = prior = None
    if dists is not None:
        class_dist = dists[atoms]
        mass = priors[atoms]
        prior = mass / mass.sum() if mass.sum() > 0 else np.full(
            len(atoms), 1.0 / len(atoms))
    return Dictionary(dictionary.atoms[:, atoms], class_dist, prior)
