import logging

from attribute_app import csvio
from attribute_app.exceptions import InputError
from attribute_app.recognize import accuracy, classify_sequences, confusion, \
    cross_validate, encode_sequences
from attribute_app.serializers import ClassifyConfigSerializer
from attribute_app.utils import RunCommand

logger = logging.getLogger(__name__)


class Command(RunCommand):
    help = ('Classify sequences in the sparse-code domain (DTW or code '
            'histograms, k-NN). Writes predictions and a confusion matrix.')
    config_serializer = ClassifyConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('dictionary', nargs='?', default=None)
        parser.add_argument('train', nargs='?', default=None)
        parser.add_argument('test', nargs='?', default=None)
        parser.add_argument('--split', default=None,
                            help='cross-validate the train file instead: '
                                 'group (leave one group out) or kfold')
        parser.add_argument('--folds', type=int, default=None)
        parser.add_argument('--scheme', default=None)
        parser.add_argument('--knn', type=int, default=None)
        parser.add_argument('--sparsity', type=int, default=None)
        parser.add_argument('--absolute', action='store_true', default=None,
                            help='compare absolute codes')
        parser.add_argument('--out', default=None)

    def run(self, config, n_jobs):
        dictionary = csvio.read_dictionary(config['dictionary'],
                                           with_sidecars=False)
        train = csvio.read_features(config['train'])
        train.require_labels()
        test = None
        if config['test'] is not None:
            test = csvio.read_features(config['test'])
            if not len(test):
                raise InputError(f"{config['test']}: no test sequences")
        T = config['sparsity']
        scheme, knn = config['scheme'], config['knn']

        train_codes = encode_sequences(dictionary, train, T, n_jobs=n_jobs)
        if test is None:
            predictions = cross_validate(
                train_codes, config['split'], config['folds'], scheme, knn,
                absolute=config['absolute'], n_jobs=n_jobs)
        else:
            test_codes = encode_sequences(dictionary, test, T, n_jobs=n_jobs)
            predictions = classify_sequences(
                train_codes, test_codes, scheme, knn,
                absolute=config['absolute'], n_jobs=n_jobs)

        out = config['out']
        csvio.write_predictions(predictions, out)
        score = accuracy(predictions)
        if score is None:
            self.stdout.write(f"classified {len(predictions)} sequences")
            return
        M = max([train.n_classes] + [p.true_label for p in predictions
                                     if p.true_label is not None])
        csvio.write_confusion(confusion(predictions, M),
                              csvio.sidecar(out, 'confusion'))
        logger.info("%s accuracy %.4f over %d sequences", scheme, score,
                    len(predictions))
        self.stdout.write(f"accuracy {score:.4f} ({len(predictions)} sequences)")
