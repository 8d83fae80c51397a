import sys

from tricl_lab.cli import main

if __name__ == '__main__':
    # python main.py train-eval --config configs/train_eval.json --out runs/demo
    sys.exit(main())
