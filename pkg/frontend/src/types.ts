/** Wire types of the session-service JSON API. */

export interface SessionInfo {
  session_id: string;
  state: string;
  num_trials: number;
  num_training: number;
}

export interface SessionStatus {
  session_id: string;
  listener_id: string;
  state: string;
  completed_trials: number;
  total_trials: number;
}

export interface StimulusRef {
  stimulus_id: string;
  url: string;
}

export interface CurrentTrial {
  complete: boolean;
  trial_id?: string;
  trial_index?: number;
  trial_count?: number;
  training?: boolean;
  reference?: { url: string };
  stimuli?: StimulusRef[];
}

export interface Rating {
  stimulus_id: string;
  score: number;
}

export interface SubmitResult {
  accepted: string;
  complete: boolean;
  next_trial_id: string | null;
  completed_trials: number;
}
