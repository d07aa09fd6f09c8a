"""
Write the data fixtures:

    fixtures/iris.csv            100 Setosa/Versicolour rows from scikit-learn's copy of iris
    fixtures/ibmqx4_series.csv   43-day synthetic calibration history around fixtures/ibmqx4.json
"""
import logging
import sys

from calibration.device import load_device
from calibration.series import save_series, synth_series
from classifier.datasets import IRIS_COLUMNS, iris_frame
from config import config

logger = logging.getLogger(__name__)


def write_iris_fixture(path=None):
    path = path or config.IRIS_CSV
    df = iris_frame()[IRIS_COLUMNS]
    df.to_csv(path, index=False)
    logger.info(f"Saved {len(df)} iris samples to {path}")
    return path


def write_series_fixture(path=None):
    path = path or config.FIXTURES_DIR / "ibmqx4_series.csv"
    series = synth_series(load_device(config.DEVICE_JSON), config.SYNTH_DAYS, config.SYNTH_DRIFT, config.FIXTURE_SEED)
    save_series(series, path)
    return path


def main():
    logging.basicConfig(level=getattr(logging, config.LOG_LEVEL), format=config.LOG_FORMAT)
    try:
        write_iris_fixture()
        write_series_fixture()
    except Exception as e:
        logger.error(f"Error writing fixtures: {e}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
