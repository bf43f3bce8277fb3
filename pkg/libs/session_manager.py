import streamlit as st

from config import settings


def get_or_init(key: str, default: any = None): # type: ignore
    """ st.session_state[key], set to default on first access."""
    if key not in st.session_state:
        st.session_state[key] = default
    return st.session_state[key]


def get_session_series():
    """ Loaded series from st.session_state.\n
        ✅ TimeSeries plus the file name or simulation label it came from\n
        ✅ (None, None) when nothing is loaded
    """
    if 'series' in st.session_state and st.session_state['series'] is not None:
        return st.session_state['series'], st.session_state.get('series_source')
    return None, None


def set_session_series(series, source):
    st.session_state['series'] = series
    st.session_state['series_source'] = source


def clear_session_series(*_):
    st.session_state['series'] = None
    st.session_state['series_source'] = None


def get_session_test_settings():
    """ Sidebar test settings (alpha, B, seed, side, eps), defaulting to config.settings."""
    return {
        'alpha': get_or_init('alpha', settings.ALPHA),
        'B': get_or_init('n_perms', settings.N_PERMS),
        'seed': get_or_init('seed', 0),
        'side': get_or_init('side', settings.SIDE),
        'eps': get_or_init('eps', settings.EPS),
    }
