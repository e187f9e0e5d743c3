from attribute_app import csvio, synthetic
from attribute_app.serializers import GenConfigSerializer
from attribute_app.utils import RunCommand

# command option -> generator keyword, per kind
OPTION_NAMES = {
    'sparse': {'n': 'n', 'atoms': 'atoms', 'sparsity': 'sparsity',
               'frames': 'frames', 'noise': 'noise'},
    'mixture': {'n': 'n', 'classes': 'M', 'sequences': 'sequences_per_class',
                'frames': 'frames', 'noise': 'spread'},
    'attributes': {'n': 'n', 'classes': 'M',
                   'sequences': 'sequences_per_class', 'frames': 'frames',
                   'noise': 'noise'},
    'actions': {'n': 'n', 'classes': 'M', 'sequences': 'actors',
                'frames': 'frames', 'noise': 'noise'},
    'clusters': {'n': 'n', 'classes': 'clusters', 'sequences': 'sequences',
                 'frames': 'per_cluster', 'noise': 'noise'},
}


class Command(RunCommand):
    help = ('Write a synthetic feature file: sparse signals, a labeled '
            'mixture, class attributes over a background, actor-performed '
            'action sequences or frame clusters.')
    config_serializer = GenConfigSerializer

    def add_run_arguments(self, parser):
        parser.add_argument('--kind', default=None)
        parser.add_argument('--n', type=int, default=None)
        parser.add_argument('--classes', type=int, default=None)
        parser.add_argument('--sequences', type=int, default=None)
        parser.add_argument('--frames', type=int, default=None)
        parser.add_argument('--atoms', type=int, default=None)
        parser.add_argument('--sparsity', type=int, default=None)
        parser.add_argument('--noise', type=float, default=None)
        parser.add_argument('--out', default=None)

    def run(self, config, n_jobs):
        kind = config['kind']
        names = OPTION_NAMES[kind]
        options = {names[key]: value for key, value in config.items()
                   if key in names}
        if kind == 'sparse':
            options['signals'] = config.get('sequences', 50) * \
                options.get('frames', 10)
        dataset = synthetic.generate(kind, config['seed'], **options)
        csvio.write_features(dataset, config['out'])
        self.stdout.write(f"wrote {len(dataset)} {kind} sequences "
                          f"({dataset.n_frames} frames, n={dataset.n})")
