from attribute_app import csvio
from attribute_app.exceptions import InputError
from attribute_app.numcore import flatten
from attribute_app.pursuit import omp_encode
from attribute_app.serializers import EncodeConfigSerializer
from attribute_app.utils import RunCommand


class Command(RunCommand):
    help = 'Sparse-code every frame of a feature file over a dictionary.'
    config_serializer = EncodeConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('dictionary', nargs='?', default=None)
        parser.add_argument('features', nargs='?', default=None)
        parser.add_argument('--sparsity', type=int, default=None)
        parser.add_argument('--out', default=None)

    def run(self, config, n_jobs):
        dictionary = csvio.read_dictionary(config['dictionary'],
                                           with_sidecars=False)
        dataset = csvio.read_features(config['features'])
        if dataset.n != dictionary.n:
            raise InputError(
                f"feature dimension {dataset.n} does not match dictionary "
                f"dimension {dictionary.n}")
        Y, _, frame_index = flatten(dataset)
        codes = omp_encode(dictionary, Y, config['sparsity'], n_jobs=n_jobs)
        csvio.write_codes(codes, frame_index, dataset, config['out'])
        self.stdout.write(
            f"encoded {codes.N} frames over {codes.K} atoms "
            f"({codes.matrix.nnz} coefficients)")
