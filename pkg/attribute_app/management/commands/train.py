import logging

from django.conf import settings

from attribute_app import csvio
from attribute_app.exceptions import InputError
from attribute_app.labeldist import atom_class_dist, atom_prior
from attribute_app.numcore import flatten
from attribute_app.pursuit import ksvd_train
from attribute_app.serializers import TrainConfigSerializer
from attribute_app.utils import RunCommand

logger = logging.getLogger(__name__)


class Command(RunCommand):
    help = ('Learn an initial over-complete dictionary with K-SVD. Writes '
            'the dictionary, its codes and the error history.')
    config_serializer = TrainConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('features', nargs='?', default=None)
        parser.add_argument('--atoms', type=int, default=None)
        parser.add_argument('--sparsity', type=int, default=None)
        parser.add_argument('--iters', type=int, default=None)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--exclude-class', dest='exclude_class',
                            type=int, default=None,
                            help='train without the sequences of this class')
        parser.add_argument('--agg', dest='aggregation', default=None)
        parser.add_argument('--prior', default=None)
        parser.add_argument('--out', default=None)

    def run(self, config, n_jobs):
        dataset = csvio.read_features(config['features'])
        labeled = dataset.is_labeled
        if labeled:
            dataset.require_labels()
        M = dataset.n_classes
        excluded = config['exclude_class']
        if excluded is not None:
            dataset = dataset.without_class(excluded)
            if not len(dataset):
                raise InputError(
                    f"no sequences left after excluding class {excluded}")
            logger.info("excluding class %d: %d sequences left", excluded,
                        len(dataset))
        Y, labels, frame_index = flatten(dataset)

        dictionary, codes, history = ksvd_train(
            Y, config['atoms'], config['sparsity'], config['iters'],
            config['seed'], tol=config['tol'],
            residual_tol=settings.MMIDICT['OMP_RESIDUAL_TOL'], n_jobs=n_jobs)
        if labeled:
            # the excluded class keeps its column, with zero mass
            dictionary = dictionary.with_class_dist(
                atom_class_dist(codes, labels, M, config['aggregation']),
                atom_prior(codes, config['prior']))

        out = config['out']
        csvio.write_dictionary(dictionary, out)
        csvio.write_codes(codes, frame_index, dataset,
                          csvio.sidecar(out, 'codes'))
        csvio.write_history(history, csvio.sidecar(out, 'history'))
        self.stdout.write(
            f"trained {dictionary.K} atoms on {Y.shape[1]} signals in "
            f"{len(history)} iterations; rmse {history[-1]:.6g}")
